//! Shapelet-guided Gaussian augmentation of minority classes.
//!
//! An augmented instance is `x + E ⊙ M`: Gaussian noise `E` everywhere in the
//! unpadded region, scaled on the best match of a same-class shapelet by the
//! match's PSD, so well-matched class structure is preserved.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::distance::{psd_with, MatchResult};
use crate::error::{Result, ShipError};
use crate::rng::SeededRng;
use crate::types::{ClassLabel, Dataset, LabeledSeries, Shapelet, ShapeletPool};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub mu: f64,
    /// Multiplies each channel's standard deviation over the unpadded region.
    pub sigma_scale: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { mu: 0.0, sigma_scale: 0.1 }
    }
}

impl NoiseSpec {
    pub fn from_config(config: &Config) -> Self {
        NoiseSpec {
            mu: config.noise_mu,
            sigma_scale: config.noise_sigma_scale,
        }
    }
}

/// Per-entry noise multipliers, `V × T`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    pub values: Vec<Vec<f64>>,
}

/// Mask for `s` on `x`: 1 in the unpadded region, the PSD on the matched
/// span of the shapelet's channel (capped at 1 when `clamp`), 0 on padding.
pub fn build_mask(x: &LabeledSeries, s: &Shapelet, clamp: bool) -> Result<(Mask, MatchResult)> {
    build_mask_with(x, s, clamp, false)
}

pub fn build_mask_with(
    x: &LabeledSeries,
    s: &Shapelet,
    clamp: bool,
    z_normalize: bool,
) -> Result<(Mask, MatchResult)> {
    let m = psd_with(x, s.channel, &s.values, z_normalize)?;
    let factor = if clamp { m.psd.min(1.0) } else { m.psd };
    let n = x.original_length;
    let mut values: Vec<Vec<f64>> = (0..x.n_channels())
        .map(|_| {
            let mut row = vec![1.0; n];
            row.resize(x.len(), 0.0);
            row
        })
        .collect();
    values[s.channel][m.offset..m.offset + s.len()].fill(factor);
    Ok((Mask { values }, m))
}

fn channel_std(row: &[f64]) -> f64 {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    (row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Id of the `replica`-th augmented copy of `source_id`.
pub fn augmented_id(source_id: &str, replica: usize) -> String {
    format!("{source_id}#aug{replica}")
}

/// One augmented copy of `x`, drawing a same-class shapelet uniformly among
/// those that fit inside `x`.
pub fn augment_instance(
    x: &LabeledSeries,
    pool: &ShapeletPool,
    spec: &NoiseSpec,
    clamp: bool,
    z_normalize: bool,
    rng: &SeededRng,
    replica: usize,
) -> Result<LabeledSeries> {
    let eligible: Vec<&Shapelet> = pool
        .of_class(&x.label)
        .map(|(_, s)| s)
        .filter(|s| s.len() <= x.original_length)
        .collect();
    if eligible.is_empty() {
        return Err(ShipError::NoShapeletForClass(x.label.to_string()));
    }
    let mut g = rng.rng();
    let s = eligible[g.random_range(0..eligible.len())];
    let (mask, _) = build_mask_with(x, s, clamp, z_normalize)?;

    let n = x.original_length;
    let mut values = x.values.clone();
    for (row, mask_row) in values.iter_mut().zip(&mask.values) {
        let sigma = spec.sigma_scale * channel_std(&row[..n]);
        let normal = Normal::new(spec.mu, sigma)
            .map_err(|e| ShipError::InvalidConfig(format!("noise distribution: {e}")))?;
        for (v, m) in row[..n].iter_mut().zip(&mask_row[..n]) {
            let e = normal.sample(&mut g);
            *v += e * m;
        }
    }
    LabeledSeries::new(
        augmented_id(&x.id, replica),
        x.label.clone(),
        x.original_length,
        x.channel_names.clone(),
        values,
    )
}

/// The most frequent class; ties go to the first in label order.
pub fn majority_class(dataset: &Dataset) -> Option<ClassLabel> {
    let mut best: Option<(&ClassLabel, usize)> = None;
    for (label, &n) in dataset.class_counts() {
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((label, n));
        }
    }
    best.map(|(l, _)| l.clone())
}

/// Appends `config.r_sa` augmented copies of every minority-class instance.
///
/// Originals keep their order; copies follow grouped by source instance.
/// Copy `j` of instance `i` draws from stream `rng / i / j`.
pub fn balance_dataset(dataset: &Dataset, pool: &ShapeletPool, config: &Config, rng: &SeededRng) -> Result<Dataset> {
    let Some(majority) = majority_class(dataset) else {
        return Ok(dataset.clone());
    };
    if config.r_sa == 0 {
        return Ok(dataset.clone());
    }
    let spec = NoiseSpec::from_config(config);
    let minority: Vec<(usize, &LabeledSeries)> = dataset
        .iter()
        .enumerate()
        .filter(|(_, x)| x.label != majority)
        .collect();
    let copies: Vec<Vec<LabeledSeries>> = minority
        .par_iter()
        .map(|&(i, x)| {
            let stream = rng.derive(i as u64);
            (0..config.r_sa)
                .map(|j| {
                    augment_instance(
                        x,
                        pool,
                        &spec,
                        config.clamp_mask,
                        config.z_normalize,
                        &stream.derive(j as u64),
                        j,
                    )
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut out = dataset.instances().to_vec();
    out.extend(copies.into_iter().flatten());
    Ok(Dataset::new(out))
}
