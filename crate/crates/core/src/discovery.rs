//! Offline shapelet discovery.
//!
//! Candidates come from every run of three consecutive PIPs created by an
//! insertion. Each candidate is scored by the one-vs-rest information gain of
//! its PSD values over the whole training set, and the best `g / |Y|`
//! candidates of every class form the pool.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use log::warn;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::config::Config;
use crate::distance::min_cid;
use crate::error::{Result, ShipError};
use crate::pip::extract_pips_incremental;
use crate::rng::{streams, SeededRng};
use crate::types::{ClassLabel, Dataset, LabeledSeries, Shapelet, ShapeletPool, MIN_SERIES_LEN};

/// An unscored shapelet candidate; the span is inclusive and 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub values: Vec<f64>,
    pub channel: usize,
    pub source_id: String,
    pub start: usize,
    pub end: usize,
    pub label: ClassLabel,
}

impl Candidate {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Candidates from every channel of `x`.
///
/// Fails with [`ShipError::TooFewPoints`] when the unpadded region is
/// shorter than `k`.
pub fn generate_candidates(x: &LabeledSeries, k: usize) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    for channel in 0..x.n_channels() {
        let series = x.channel(channel)?;
        let mut seen = BTreeSet::new();
        for state in extract_pips_incremental(series, k)? {
            let pips = &state.pips;
            let idx = state.position;
            for z in 0..=2usize {
                if idx < z || idx + 2 - z > pips.len() - 1 {
                    continue;
                }
                let (start, end) = (pips[idx - z], pips[idx + 2 - z]);
                if end - start + 1 < MIN_SERIES_LEN || !seen.insert((start, end)) {
                    continue;
                }
                out.push(Candidate {
                    values: series[start..=end].to_vec(),
                    channel,
                    source_id: x.id.clone(),
                    start,
                    end,
                    label: x.label.clone(),
                });
            }
        }
    }
    Ok(out)
}

fn binary_entropy(pos: usize, n: usize) -> f64 {
    if n == 0 || pos == 0 || pos == n {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    let q = 1.0 - p;
    -(p * p.log2() + q * q.log2())
}

/// Best one-vs-rest split of `(distance, is_target)` pairs.
///
/// Thresholds lie midway between consecutive distinct distances and an entry
/// goes left when its distance is `<=` the threshold. When the upper value is
/// infinite (an instance too short for the candidate) the threshold is the
/// lower value. Returns `(gain in bits, threshold)`; the smallest threshold
/// wins ties. Without a usable split the gain is 0 and the threshold is the
/// minimum distance.
pub fn information_gain(distances: &[(f64, bool)]) -> (f64, f64) {
    if distances.is_empty() {
        return (0.0, 0.0);
    }
    let mut sorted = distances.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let total_pos = sorted.iter().filter(|e| e.1).count();
    let min = sorted[0].0;
    if total_pos == 0 || total_pos == n {
        return (0.0, min);
    }
    let parent = binary_entropy(total_pos, n);

    let mut best: Option<(f64, f64)> = None;
    let mut left_pos = 0;
    for i in 0..n - 1 {
        if sorted[i].1 {
            left_pos += 1;
        }
        let (lo, hi) = (sorted[i].0, sorted[i + 1].0);
        if lo == hi {
            continue;
        }
        let nl = i + 1;
        let nr = n - nl;
        let children = (nl as f64 / n as f64) * binary_entropy(left_pos, nl)
            + (nr as f64 / n as f64) * binary_entropy(total_pos - left_pos, nr);
        let gain = (parent - children).max(0.0);
        let threshold = if hi.is_finite() { lo + (hi - lo) / 2.0 } else { lo };
        if best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, threshold));
        }
    }
    best.unwrap_or((0.0, min))
}

#[derive(Clone, Debug)]
struct Scored {
    candidate: Candidate,
    gain: f64,
    threshold: f64,
    max_psd: f64,
}

fn selection_order(a: &Scored, b: &Scored) -> Ordering {
    b.gain
        .total_cmp(&a.gain)
        .then(a.candidate.len().cmp(&b.candidate.len()))
        .then(a.candidate.start.cmp(&b.candidate.start))
        .then_with(|| a.candidate.source_id.cmp(&b.candidate.source_id))
        .then(a.candidate.channel.cmp(&b.candidate.channel))
        .then(a.candidate.end.cmp(&b.candidate.end))
}

/// Indices of the instances that contribute candidates, in dataset order.
fn candidate_sources(dataset: &Dataset, config: &Config) -> Vec<usize> {
    let rng = SeededRng::new(config.seed).derive(streams::DISCOVERY);
    let mut chosen = Vec::new();
    for (ci, label) in dataset.labels().iter().enumerate() {
        let mut idx: Vec<usize> = dataset
            .iter()
            .enumerate()
            .filter(|(_, x)| &x.label == label)
            .map(|(i, _)| i)
            .collect();
        if let Some(cap) = config.max_sources_per_class {
            if idx.len() > cap {
                idx.shuffle(&mut rng.derive(ci as u64).rng());
                idx.truncate(cap);
            }
        }
        chosen.extend(idx);
    }
    chosen.sort_unstable();
    chosen
}

/// PSDs of one candidate against every instance, in dataset order.
/// Instances too short to hold the candidate get `+inf`.
pub fn candidate_distances(dataset: &Dataset, channel: usize, values: &[f64], z_normalize: bool) -> Vec<f64> {
    dataset
        .iter()
        .map(|x| {
            let series = &x.values[channel][..x.original_length];
            min_cid(series, values, z_normalize).map_or(f64::INFINITY, |(d, _)| d)
        })
        .collect()
}

fn score(dataset: &Dataset, candidate: Candidate, z_normalize: bool) -> Scored {
    let distances = candidate_distances(dataset, candidate.channel, &candidate.values, z_normalize);
    let max_psd = distances
        .iter()
        .copied()
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max);
    let labelled: Vec<(f64, bool)> = distances
        .into_iter()
        .zip(dataset.iter())
        .map(|(d, x)| (d, x.label == candidate.label))
        .collect();
    let (gain, threshold) = information_gain(&labelled);
    Scored {
        candidate,
        gain,
        threshold,
        max_psd,
    }
}

/// Discovers a class-balanced shapelet pool from `dataset`.
///
/// The result depends only on `(dataset, config)`; scoring runs on the
/// current rayon pool and is collected in candidate order.
pub fn discover(dataset: &Dataset, config: &Config) -> Result<ShapeletPool> {
    config.validate()?;
    let labels = dataset.labels();
    if labels.len() < 2 {
        return Err(ShipError::InvalidInput(format!(
            "discovery needs at least two classes, found {}",
            labels.len()
        )));
    }
    let quota = config.per_class_quota(labels.len());

    let sources = candidate_sources(dataset, config);
    let per_source: Vec<Vec<Candidate>> = sources
        .par_iter()
        .map(|&i| {
            let x = &dataset.instances()[i];
            match generate_candidates(x, config.k) {
                Ok(c) => c,
                Err(e) => {
                    warn!("skipping `{}` for candidate generation: {e}", x.id);
                    Vec::new()
                }
            }
        })
        .collect();
    let candidates: Vec<Candidate> = per_source.into_iter().flatten().collect();

    let scored: Vec<Scored> = candidates
        .into_par_iter()
        .map(|c| score(dataset, c, config.z_normalize))
        .collect();

    let mut shapelets = Vec::new();
    for label in &labels {
        let mut of_class: Vec<&Scored> = scored.iter().filter(|s| &s.candidate.label == label).collect();
        of_class.sort_by(|a, b| selection_order(a, b));
        if of_class.len() < quota {
            warn!(
                "class {label}: only {} candidates for a quota of {quota}",
                of_class.len()
            );
        }
        for s in of_class.into_iter().take(quota) {
            let c = &s.candidate;
            shapelets.push(Shapelet {
                values: c.values.clone(),
                channel: c.channel,
                source_id: c.source_id.clone(),
                start: c.start,
                end: c.end,
                label: c.label.clone(),
                info_gain: s.gain,
                split_threshold: s.threshold,
                max_train_psd: s.max_psd,
            });
        }
    }
    Ok(ShapeletPool {
        shapelets,
        per_class_quota: quota,
    })
}
