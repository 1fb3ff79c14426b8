//! Complexity-invariant distance (CID) and the perceptual subsequence
//! distance (PSD): the smallest CID between a query and every same-length
//! window of a series' unpadded region.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShipError};
use crate::types::LabeledSeries;

/// Floor on the smaller complexity estimate in the correction factor.
pub const CE_EPS: f64 = 1e-8;

/// Best-matching window of a series for a query subsequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub psd: f64,
    pub offset: usize,
    pub window: Vec<f64>,
}

/// Root of the summed squared first differences.
pub fn complexity_estimate(q: &[f64]) -> f64 {
    q.windows(2)
        .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
        .sum::<f64>()
        .sqrt()
}

pub fn euclidean(q: &[f64], s: &[f64]) -> Result<f64> {
    if q.len() != s.len() {
        return Err(ShipError::LengthMismatch {
            left: q.len(),
            right: s.len(),
        });
    }
    Ok(q.iter()
        .zip(s)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Never below 1, so two constant series compare by plain Euclidean distance.
fn correction_factor(ce_a: f64, ce_b: f64) -> f64 {
    ce_a.max(ce_b).max(CE_EPS) / ce_a.min(ce_b).max(CE_EPS)
}

/// Euclidean distance scaled by the ratio of complexity estimates.
pub fn cid(q: &[f64], s: &[f64]) -> Result<f64> {
    let ed = euclidean(q, s)?;
    if ed == 0.0 {
        return Ok(0.0);
    }
    Ok(ed * correction_factor(complexity_estimate(q), complexity_estimate(s)))
}

/// Zero-mean, unit-variance copy; constant input maps to zeros.
pub fn z_normalized(q: &[f64]) -> Vec<f64> {
    let n = q.len() as f64;
    let mean = q.iter().sum::<f64>() / n;
    let var = q.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd < 1e-8 {
        vec![0.0; q.len()]
    } else {
        q.iter().map(|x| (x - mean) / sd).collect()
    }
}

/// Minimum CID of `query` over all windows of `series`, with the smallest
/// minimizing offset. `None` when the query is empty or longer than the series.
///
/// Windows are abandoned early only once their partial Euclidean sum already
/// exceeds the best distance, so the result equals exhaustive enumeration.
pub fn min_cid(series: &[f64], query: &[f64], z_normalize: bool) -> Option<(f64, usize)> {
    let l = query.len();
    if l == 0 || l > series.len() {
        return None;
    }
    if z_normalize {
        let q = z_normalized(query);
        let mut best: Option<(f64, usize)> = None;
        for j in 0..=series.len() - l {
            let w = z_normalized(&series[j..j + l]);
            let d = cid(&w, &q).expect("equal lengths");
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, j));
            }
        }
        return best;
    }

    let ce_q = complexity_estimate(query);
    let mut best = f64::INFINITY;
    let mut best_j = 0;
    for j in 0..=series.len() - l {
        let window = &series[j..j + l];
        // CF >= 1, so a window whose ED alone reaches `best` cannot win.
        let limit = best * best * (1.0 + 1e-9) + f64::MIN_POSITIVE;
        let mut ed2 = 0.0;
        let mut abandoned = false;
        for (a, b) in window.iter().zip(query) {
            ed2 += (a - b) * (a - b);
            if ed2 > limit {
                abandoned = true;
                break;
            }
        }
        if abandoned {
            continue;
        }
        let d = if ed2 == 0.0 {
            0.0
        } else {
            ed2.sqrt() * correction_factor(complexity_estimate(window), ce_q)
        };
        if d < best {
            best = d;
            best_j = j;
            if d == 0.0 {
                break;
            }
        }
    }
    Some((best, best_j))
}

/// PSD of a shapelet against one channel of an instance, searching only the
/// unpadded region.
pub fn psd(x: &LabeledSeries, channel: usize, s: &[f64]) -> Result<MatchResult> {
    psd_with(x, channel, s, false)
}

pub fn psd_with(x: &LabeledSeries, channel: usize, s: &[f64], z_normalize: bool) -> Result<MatchResult> {
    let series = x.channel(channel)?;
    match min_cid(series, s, z_normalize) {
        Some((psd, offset)) => Ok(MatchResult {
            psd,
            offset,
            window: series[offset..offset + s.len()].to_vec(),
        }),
        None => Err(ShipError::ShapeletTooLong {
            shapelet_len: s.len(),
            original_length: x.original_length,
        }),
    }
}
