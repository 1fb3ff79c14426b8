//! Feature transforms: shapelet distances, log-signature statistics and
//! z-score standardization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::min_cid;
use crate::error::{Result, ShipError};
use crate::types::{ClassLabel, Dataset, LabeledSeries, ShapeletPool};

/// Floor on a standardized coordinate's standard deviation.
pub const STD_EPS: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub z_sha: Vec<f64>,
    pub z_sta: Vec<f64>,
}

impl FeatureVector {
    /// Shapelet features followed by statistical features.
    pub fn concat(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.z_sha.len() + self.z_sta.len());
        z.extend_from_slice(&self.z_sha);
        z.extend_from_slice(&self.z_sta);
        z
    }

    pub fn dim(&self) -> usize {
        self.z_sha.len() + self.z_sta.len()
    }
}

/// PSD of `x` to every pool shapelet, in pool order. A shapelet longer than
/// `x`'s unpadded region yields its recorded training maximum.
pub fn shapelet_transform(x: &LabeledSeries, pool: &ShapeletPool, z_normalize: bool) -> Result<Vec<f64>> {
    pool.shapelets
        .iter()
        .map(|s| {
            let series = x.channel(s.channel)?;
            Ok(min_cid(series, &s.values, z_normalize).map_or(s.max_train_psd, |(d, _)| d))
        })
        .collect()
}

/// Signed smooth logarithm, `sign(d) * ln(1 + |d|)`.
pub fn signed_log(d: f64) -> f64 {
    d.signum() * d.abs().ln_1p()
}

/// Number of ways to choose `r` items from `n`, as a float.
fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Log-signature terms of orders `1..=depth` for one channel.
///
/// Order 1 sums `signed_log` over consecutive increments. Order `n >= 2` sums
/// `signed_log(x[i_n] - x[i_{n-1}])` over all increasing index tuples
/// `i_1 < ... < i_n`; only the last pair enters the summand, so each pair
/// `(a, b)` is weighted by the `C(a, n - 2)` ways to choose the earlier indices.
pub fn logsig_channel(series: &[f64], depth: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(depth);
    if depth == 0 {
        return out;
    }
    out.push(series.windows(2).map(|w| signed_log(w[1] - w[0])).sum());
    if depth == 1 {
        return out;
    }
    // pair_sums[a] = sum over b > a of signed_log(x[b] - x[a])
    let pair_sums: Vec<f64> = (0..series.len())
        .map(|a| series[a + 1..].iter().map(|&xb| signed_log(xb - series[a])).sum())
        .collect();
    for order in 2..=depth {
        out.push(
            pair_sums
                .iter()
                .enumerate()
                .map(|(a, s)| binomial(a, order - 2) * s)
                .sum(),
        );
    }
    out
}

/// Channel-major log-signature features, `V × depth` values.
pub fn logsig_transform(x: &LabeledSeries, depth: usize) -> Vec<f64> {
    (0..x.n_channels())
        .flat_map(|v| logsig_channel(&x.values[v][..x.original_length], depth))
        .collect()
}

/// Which feature families to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub shapelets: bool,
    pub logsig_depth: usize,
    pub z_normalize: bool,
}

pub fn transform(x: &LabeledSeries, pool: &ShapeletPool, spec: &FeatureSpec) -> Result<FeatureVector> {
    let z_sha = if spec.shapelets {
        shapelet_transform(x, pool, spec.z_normalize)?
    } else {
        Vec::new()
    };
    Ok(FeatureVector {
        z_sha,
        z_sta: logsig_transform(x, spec.logsig_depth),
    })
}

/// Features and labels for a whole dataset, in dataset order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub labels: Vec<ClassLabel>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn records(&self) -> impl Iterator<Item = FeatureRecord> + '_ {
        self.ids
            .iter()
            .zip(&self.labels)
            .zip(&self.rows)
            .map(|((id, label), z)| FeatureRecord {
                id: id.clone(),
                label: label.clone(),
                z: z.clone(),
            })
    }

    pub fn from_records(records: Vec<FeatureRecord>) -> Self {
        let mut m = FeatureMatrix {
            ids: Vec::with_capacity(records.len()),
            labels: Vec::with_capacity(records.len()),
            rows: Vec::with_capacity(records.len()),
        };
        for r in records {
            m.ids.push(r.id);
            m.labels.push(r.label);
            m.rows.push(r.z);
        }
        m
    }
}

/// One line of the feature dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub id: String,
    pub label: ClassLabel,
    pub z: Vec<f64>,
}

pub fn transform_dataset(dataset: &Dataset, pool: &ShapeletPool, spec: &FeatureSpec) -> Result<FeatureMatrix> {
    let rows: Vec<Vec<f64>> = dataset
        .instances()
        .par_iter()
        .map(|x| transform(x, pool, spec).map(|f| f.concat()))
        .collect::<Result<_>>()?;
    Ok(FeatureMatrix {
        ids: dataset.iter().map(|x| x.id.clone()).collect(),
        labels: dataset.iter().map(|x| x.label.clone()).collect(),
        rows,
    })
}

/// Per-coordinate z-score statistics fitted on training features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(ShipError::InvalidInput(format!(
                "scaler needs at least 2 rows, got {}",
                rows.len()
            )));
        }
        let d = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(ShipError::LengthMismatch { left: d, right: r.len() });
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt().max(STD_EPS)).collect();
        Ok(FeatureScaler { mean, std })
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}
