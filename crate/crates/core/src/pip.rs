//! Perceptually important points.
//!
//! Starting from the two endpoints, each step adds the point farthest (in
//! perpendicular distance) from the chord joining its two bracketing PIPs.

use crate::error::{Result, ShipError};

/// Selected PIPs after one insertion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipState {
    /// Sorted indices, always including both endpoints.
    pub pips: Vec<usize>,
    /// The index just added.
    pub added: usize,
    /// Position of `added` within `pips`.
    pub position: usize,
}

/// Perpendicular distance from `(t, series[t])` to the line through
/// `(a, series[a])` and `(b, series[b])`, time measured in samples.
pub fn reconstruction_distance(series: &[f64], a: usize, b: usize, t: usize) -> f64 {
    let (xa, ya) = (a as f64, series[a]);
    let (xb, yb) = (b as f64, series[b]);
    let (xt, yt) = (t as f64, series[t]);
    let dx = xb - xa;
    let dy = yb - ya;
    ((dy * (xt - xa) - dx * (yt - ya)).abs()) / (dx * dx + dy * dy).sqrt()
}

/// Runs `k - 2` insertions over `series` and returns the state after each.
pub fn extract_pips_incremental(series: &[f64], k: usize) -> Result<Vec<PipState>> {
    if k < 3 {
        return Err(ShipError::InvalidConfig(format!("k = {k}; at least 3 PIPs are required")));
    }
    let n = series.len();
    if n < k {
        return Err(ShipError::TooFewPoints { len: n, k });
    }

    let mut pips = vec![0, n - 1];
    // Distance of every non-PIP point to its current chord; NaN marks PIPs.
    let mut dist = vec![f64::NAN; n];
    refresh(series, 0, n - 1, &mut dist);

    let mut states = Vec::with_capacity(k - 2);
    for _ in 0..k - 2 {
        let mut best: Option<(usize, f64)> = None;
        for (t, &d) in dist.iter().enumerate() {
            if d.is_nan() {
                continue;
            }
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((t, d));
            }
        }
        let (p, _) = best.expect("n >= k leaves a free point");
        let position = pips.partition_point(|&q| q < p);
        pips.insert(position, p);
        dist[p] = f64::NAN;
        refresh(series, pips[position - 1], p, &mut dist);
        refresh(series, p, pips[position + 1], &mut dist);
        states.push(PipState {
            pips: pips.clone(),
            added: p,
            position,
        });
    }
    Ok(states)
}

fn refresh(series: &[f64], a: usize, b: usize, dist: &mut [f64]) {
    for (t, d) in dist.iter_mut().enumerate().take(b).skip(a + 1) {
        *d = reconstruction_distance(series, a, b, t);
    }
}

/// Final PIP set after `k - 2` insertions.
pub fn extract_pips(series: &[f64], k: usize) -> Result<Vec<usize>> {
    Ok(extract_pips_incremental(series, k)?
        .pop()
        .map(|s| s.pips)
        .unwrap_or_else(|| vec![0, series.len() - 1]))
}
