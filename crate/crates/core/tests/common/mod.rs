//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use ship_core::{ClassLabel, LabeledSeries};

pub fn ce(v: &[f64]) -> f64 {
    v.windows(2).map(|p| (p[1] - p[0]).powi(2)).sum::<f64>().sqrt()
}

pub fn naive_cid(a: &[f64], b: &[f64]) -> f64 {
    let ed = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let (ca, cb) = (ce(a), ce(b));
    ed * ca.max(cb).max(1e-8) / ca.min(cb).max(1e-8)
}

/// Minimum CID over every window, smallest offset on ties.
pub fn naive_psd(series: &[f64], q: &[f64]) -> Option<(f64, usize)> {
    if q.len() > series.len() {
        return None;
    }
    (0..=series.len() - q.len())
        .map(|j| (naive_cid(&series[j..j + q.len()], q), j))
        .fold(None, |best: Option<(f64, usize)>, (d, j)| match best {
            Some((b, _)) if b <= d => best,
            _ => Some((d, j)),
        })
}

fn h(pos: usize, n: usize) -> f64 {
    if pos == 0 || pos == n {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Tries every midpoint threshold; smallest threshold wins ties.
pub fn exhaustive_gain(items: &[(f64, bool)]) -> (f64, f64) {
    let n = items.len();
    let pos = items.iter().filter(|e| e.1).count();
    let mut values: Vec<f64> = items.iter().map(|e| e.0).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    if pos == 0 || pos == n || values.len() < 2 {
        return (0.0, values[0]);
    }
    let mut best: Option<(f64, f64)> = None;
    for w in values.windows(2) {
        let thr = if w[1].is_finite() { (w[0] + w[1]) / 2.0 } else { w[0] };
        let nl = items.iter().filter(|e| e.0 <= thr).count();
        let lp = items.iter().filter(|e| e.0 <= thr && e.1).count();
        let gain = (h(pos, n) - nl as f64 / n as f64 * h(lp, nl) - (n - nl) as f64 / n as f64 * h(pos - lp, n - nl)).max(0.0);
        if best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, thr));
        }
    }
    best.unwrap()
}

pub fn single_channel(id: &str, label: &str, values: Vec<f64>, len: usize) -> LabeledSeries {
    LabeledSeries::from_unpadded(id, ClassLabel::from(label), vec!["c".into()], vec![values], len).unwrap()
}
