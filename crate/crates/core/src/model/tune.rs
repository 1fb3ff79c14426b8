//! k-grid construction and cross-validated selection of the PIP count.

use std::collections::BTreeMap;

use log::{info, warn};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::EvalReport;
use crate::config::Config;
use crate::error::{Result, ShipError};
use crate::rng::{streams, SeededRng};
use crate::types::Dataset;
use crate::workflow::{evaluate_dataset, fit, prepare};

/// Number of grid points before deduplication.
pub const GRID_POINTS: usize = 10;

/// Ten evenly spaced values from 3 to `floor(0.1 T)`, rounded and deduplicated.
pub fn k_grid(series_len: usize) -> Result<Vec<usize>> {
    if series_len < 30 {
        return Err(ShipError::InvalidInput(format!(
            "k grid needs a series length of at least 30, got {series_len}"
        )));
    }
    let lo = 3.0;
    let hi = (series_len / 10) as f64;
    let mut grid: Vec<usize> = Vec::with_capacity(GRID_POINTS);
    for i in 0..GRID_POINTS {
        let k = (lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64).round() as usize;
        if grid.last() != Some(&k) {
            grid.push(k);
        }
    }
    Ok(grid)
}

/// Assigns every instance to one of `folds` folds, stratified by class.
/// `folds == dataset.len()` gives leave-one-out.
pub fn stratified_folds(dataset: &Dataset, folds: usize, rng: &SeededRng) -> Result<Vec<usize>> {
    let n = dataset.len();
    if folds < 2 || folds > n {
        return Err(ShipError::Stratification(format!("{folds} folds for {n} instances")));
    }
    if folds == n {
        return Ok((0..n).collect());
    }
    let mut assignment = vec![0; n];
    let mut next = 0;
    for (ci, (label, &count)) in dataset.class_counts().iter().enumerate() {
        if count < folds {
            return Err(ShipError::Stratification(format!(
                "class {label} has {count} instances for {folds} folds"
            )));
        }
        let mut idx: Vec<usize> = dataset
            .iter()
            .enumerate()
            .filter(|(_, x)| &x.label == label)
            .map(|(i, _)| i)
            .collect();
        idx.shuffle(&mut rng.derive(ci as u64).rng());
        // Continue the round-robin across classes so fold sizes stay even.
        for i in idx {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    pub mean_macro_f1: f64,
    pub folds: Vec<EvalReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_k: usize,
    pub scores: Vec<KScore>,
}

/// Cross-validates every admissible grid value of `k` and returns the one
/// with the best mean macro-F1 (smaller `k` on ties). Early stopping inside
/// a fold uses that fold's training part.
pub fn tune_k(dataset: &Dataset, config: &Config, folds: usize) -> Result<TuneResult> {
    tune_k_over(dataset, config, folds, &k_grid(dataset.series_len())?)
}

/// [`tune_k`] over an explicit grid.
pub fn tune_k_over(dataset: &Dataset, config: &Config, folds: usize, grid: &[usize]) -> Result<TuneResult> {
    let dataset = prepare(dataset, config)?;
    let assignment = stratified_folds(
        &dataset,
        folds,
        &SeededRng::new(config.seed).derive(streams::FOLDS),
    )?;
    let min_len = dataset.min_original_length();
    let mut scores = Vec::new();
    for &k in grid {
        if k > min_len {
            warn!("k = {k} exceeds the shortest instance ({min_len}); skipped");
            continue;
        }
        let cfg = Config {
            k,
            channel_subset: None,
            ..config.clone()
        };
        let mut reports = Vec::with_capacity(folds);
        let mut admissible = true;
        for f in 0..folds {
            let (held, rest): (Vec<_>, Vec<_>) = dataset
                .iter()
                .zip(&assignment)
                .partition(|(_, &a)| a == f);
            let train_part: Dataset = rest.into_iter().map(|(x, _)| x.clone()).collect();
            let test_part: Dataset = held.into_iter().map(|(x, _)| x.clone()).collect();
            let fitted = match fit(&train_part, &train_part, &cfg, None) {
                Ok(fitted) => fitted,
                // Small k yields whole-series shapelets that shorter instances cannot hold.
                Err(ShipError::NoShapeletForClass(class)) => {
                    warn!("k = {k}: no {class} shapelet fits every {class} instance; skipped");
                    admissible = false;
                    break;
                }
                Err(e) => return Err(e),
            };
            reports.push(evaluate_dataset(&fitted.checkpoint, &fitted.pool, &test_part)?);
        }
        if !admissible {
            continue;
        }
        let mean = reports.iter().map(|r| r.macro_f1).sum::<f64>() / reports.len() as f64;
        info!("k = {k}: mean macro-F1 {mean:.4}");
        scores.push(KScore {
            k,
            mean_macro_f1: mean,
            folds: reports,
        });
    }
    let best = scores
        .iter()
        .fold(None::<&KScore>, |b, s| match b {
            Some(b) if b.mean_macro_f1 >= s.mean_macro_f1 => Some(b),
            _ => Some(s),
        })
        .ok_or_else(|| ShipError::InvalidInput("no admissible k in the grid".into()))?;
    Ok(TuneResult {
        best_k: best.k,
        scores: scores.clone(),
    })
}

/// Count of instances per fold and class, for diagnostics.
pub fn fold_class_counts(dataset: &Dataset, assignment: &[usize]) -> Vec<BTreeMap<String, usize>> {
    let folds = assignment.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![BTreeMap::new(); folds];
    for (x, &f) in dataset.iter().zip(assignment) {
        *out[f].entry(x.label.to_string()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::LabeledSeries;

    #[test]
    fn grid_examples() {
        assert_eq!(k_grid(150).unwrap(), vec![3, 4, 6, 7, 8, 10, 11, 12, 14, 15]);
        assert_eq!(k_grid(30).unwrap(), vec![3]);
        assert_eq!(k_grid(300).unwrap(), vec![3, 6, 9, 12, 15, 18, 21, 24, 27, 30]);
        assert!(k_grid(29).is_err());
    }

    fn toy(n_per_class: usize) -> Dataset {
        let mut xs = Vec::new();
        for (c, label) in ["NP", "AC"].iter().enumerate() {
            for i in 0..n_per_class {
                let v: Vec<f64> = (0..8).map(|t| ((t + i + c) % 3) as f64).collect();
                xs.push(LabeledSeries::from_unpadded(format!("{label}{i}"), (*label).into(), vec!["c".into()], vec![v], 8).unwrap());
            }
        }
        Dataset::new(xs)
    }

    #[test]
    fn folds_are_stratified() {
        let d = toy(5);
        let a = stratified_folds(&d, 5, &SeededRng::new(1)).unwrap();
        for counts in fold_class_counts(&d, &a) {
            assert_eq!(counts["NP"], 1);
            assert_eq!(counts["AC"], 1);
        }
        assert!(stratified_folds(&d, 6, &SeededRng::new(1)).is_err());
        assert!(stratified_folds(&d, 1, &SeededRng::new(1)).is_err());
    }

    #[test]
    fn leave_one_out() {
        let d = toy(6);
        let a = stratified_folds(&d, 12, &SeededRng::new(1)).unwrap();
        assert_eq!(a, (0..12).collect::<Vec<_>>());
    }
}
