//! Synthetic four-channel breath segments with ventilator-asynchrony motifs.
//!
//! Morphology per class:
//! - NP: one pressure pulse, biphasic flow, one in-phase effort on Thor/Abdo.
//! - DT: two pressure pulses separated by a short expiratory gap, one effort.
//! - AC: three or four short pressure pulses and no patient effort.
//! - IE: an NP breath plus a second effort on Thor/Abdo during expiration
//!   with no pressure response; Pmask and Flow follow the NP distribution.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShipError};
use crate::rng::{streams, SeededRng};
use crate::types::{ClassLabel, Dataset, LabeledSeries, DEFAULT_CHANNELS, DEFAULT_SERIES_LEN};

/// Reference class sizes of the clinical cohort: NP, AC, DT, IE.
pub const REFERENCE_COUNTS: [(&str, f64); 4] = [("NP", 280_110.0), ("AC", 6_385.0), ("DT", 10_595.0), ("IE", 8_040.0)];

pub fn reference_proportions() -> BTreeMap<ClassLabel, f64> {
    let total: f64 = REFERENCE_COUNTS.iter().map(|(_, n)| n).sum();
    REFERENCE_COUNTS
        .iter()
        .map(|(l, n)| (ClassLabel::from(*l), n / total))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_instances: usize,
    pub class_proportions: BTreeMap<ClassLabel, f64>,
    /// Additive noise as a fraction of each channel's nominal amplitude.
    pub noise: f64,
    pub seed: u64,
    pub series_len: usize,
    /// Shortest unpadded breath, in samples.
    pub min_length: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_instances: 2000,
            class_proportions: reference_proportions(),
            noise: 0.03,
            seed: 0,
            series_len: DEFAULT_SERIES_LEN,
            min_length: 100,
        }
    }
}

/// Instances per class by largest remainder; ties go to the earlier label.
pub fn class_quotas(n: usize, proportions: &BTreeMap<ClassLabel, f64>) -> BTreeMap<ClassLabel, usize> {
    let exact: Vec<(&ClassLabel, f64)> = proportions.iter().map(|(l, p)| (l, p * n as f64)).collect();
    let mut quotas: BTreeMap<ClassLabel, usize> = exact.iter().map(|(l, e)| ((*l).clone(), e.floor() as usize)).collect();
    let assigned: usize = quotas.values().sum();
    let mut order: Vec<usize> = (0..exact.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a].1 - exact[a].1.floor();
        let rb = exact[b].1 - exact[b].1.floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        *quotas.get_mut(exact[i].0).expect("label") += 1;
    }
    quotas
}

struct Channels {
    pmask: Vec<f64>,
    flow: Vec<f64>,
    thor: Vec<f64>,
    abdo: Vec<f64>,
}

impl Channels {
    fn new(len: usize, peep: f64) -> Self {
        Channels {
            pmask: vec![peep; len],
            flow: vec![0.0; len],
            thor: vec![0.0; len],
            abdo: vec![0.0; len],
        }
    }

    /// Ventilator breath: flattened half-sine pressure, inspiratory then
    /// expiratory flow lobes.
    fn breath(&mut self, start: f64, duration: f64, amplitude: f64, flow_amp: f64) {
        add_lobe(&mut self.pmask, start, duration, amplitude, 1.4);
        add_lobe(&mut self.flow, start, 0.6 * duration, flow_amp, 1.0);
        add_lobe(&mut self.flow, start + duration, 0.9 * duration, -0.8 * flow_amp, 1.0);
    }

    fn effort(&mut self, start: f64, duration: f64, amplitude: f64, abdo_ratio: f64) {
        add_lobe(&mut self.thor, start, duration, amplitude, 1.0);
        add_lobe(&mut self.abdo, start + 1.0, duration, amplitude * abdo_ratio, 1.0);
    }
}

/// Adds `amplitude * min(1, flatten * sin(pi (t - start) / duration))` on
/// `[start, start + duration)`.
fn add_lobe(x: &mut [f64], start: f64, duration: f64, amplitude: f64, flatten: f64) {
    for (t, v) in x.iter_mut().enumerate() {
        let u = (t as f64 - start) / duration;
        if (0.0..1.0).contains(&u) {
            *v += amplitude * (flatten * (PI * u).sin()).min(1.0);
        }
    }
}

fn one_instance(label: &ClassLabel, cfg: &SynthConfig, g: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let len = g.random_range(cfg.min_length..=cfg.series_len);
    let lf = len as f64;
    let peep = g.random_range(3.5..5.0);
    let amp = g.random_range(8.0..12.0);
    let flow_amp = g.random_range(0.8..1.2);
    let effort_amp = g.random_range(0.8..1.2);
    let abdo_ratio = g.random_range(0.7..1.0);
    let start = g.random_range(2.0..6.0);
    let mut ch = Channels::new(len, peep);

    match label.as_str() {
        "DT" => {
            let d1 = g.random_range(0.18..0.24) * lf;
            let gap = g.random_range(3.0..7.0);
            let d2 = g.random_range(0.16..0.22) * lf;
            ch.breath(start, d1, amp, flow_amp);
            ch.breath(start + d1 + gap, d2, amp * g.random_range(0.85..1.0), flow_amp);
            ch.effort(start - 2.0, 1.6 * d1, effort_amp, abdo_ratio);
        }
        "AC" => {
            let pulses = g.random_range(3..=4);
            let mut t = start;
            for _ in 0..pulses {
                let d = g.random_range(0.10..0.13) * lf;
                ch.breath(t, d, amp * g.random_range(0.8..1.0), 0.8 * flow_amp);
                t += d + g.random_range(2.0..5.0);
            }
        }
        "IE" => {
            let d = g.random_range(0.35..0.45) * lf;
            ch.breath(start, d, amp, flow_amp);
            ch.effort(start - 2.0, d, effort_amp, abdo_ratio);
            let late = g.random_range(0.65..0.75) * lf;
            ch.effort(late, g.random_range(0.15..0.2) * lf, effort_amp * g.random_range(0.7..1.0), abdo_ratio);
        }
        _ => {
            let d = g.random_range(0.35..0.45) * lf;
            ch.breath(start, d, amp, flow_amp);
            ch.effort(start - 2.0, d, effort_amp, abdo_ratio);
        }
    }

    let scales = [10.0, 1.0, 1.0, 1.0];
    let mut rows = vec![ch.pmask, ch.flow, ch.thor, ch.abdo];
    for (row, scale) in rows.iter_mut().zip(scales) {
        let noise = Normal::new(0.0, cfg.noise * scale).expect("non-negative noise");
        for v in row.iter_mut() {
            *v += noise.sample(g);
        }
    }
    rows
}

/// Generates a labelled dataset; a pure function of `cfg`.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Dataset> {
    let total: f64 = cfg.class_proportions.values().sum();
    if cfg.class_proportions.is_empty()
        || cfg.class_proportions.values().any(|&p| !(p >= 0.0))
        || (total - 1.0).abs() > 1e-6
    {
        return Err(ShipError::InvalidConfig("class proportions must be non-negative and sum to 1".into()));
    }
    if cfg.min_length < 20 || cfg.min_length > cfg.series_len {
        return Err(ShipError::InvalidConfig(format!(
            "min_length must lie in [20, {}]",
            cfg.series_len
        )));
    }
    if !(cfg.noise >= 0.0) {
        return Err(ShipError::InvalidConfig("noise must be non-negative".into()));
    }

    let root = SeededRng::new(cfg.seed).derive(streams::SYNTH);
    let mut labels: Vec<ClassLabel> = Vec::with_capacity(cfg.n_instances);
    for (label, n) in class_quotas(cfg.n_instances, &cfg.class_proportions) {
        labels.extend(std::iter::repeat_n(label, n));
    }
    labels.shuffle(&mut root.derive(u64::MAX).rng());

    let names: Vec<String> = DEFAULT_CHANNELS.iter().map(|s| s.to_string()).collect();
    labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let rows = one_instance(&label, cfg, &mut root.derive(i as u64).rng());
            LabeledSeries::from_unpadded(format!("syn{i:05}"), label, names.clone(), rows, cfg.series_len)
        })
        .collect::<Result<Vec<_>>>()
        .map(Dataset::new)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotas_track_expectation() {
        let p = reference_proportions();
        let q = class_quotas(1000, &p);
        assert_eq!(q.values().sum::<usize>(), 1000);
        for (l, n) in &q {
            assert!((*n as f64 - 1000.0 * p[l]).abs() <= 1.0, "{l}: {n}");
        }
    }

    #[test]
    fn single_class() {
        let cfg = SynthConfig {
            n_instances: 20,
            class_proportions: [(ClassLabel::np(), 1.0)].into_iter().collect(),
            ..SynthConfig::default()
        };
        let d = generate_synthetic(&cfg).unwrap();
        assert_eq!(d.class_counts()[&ClassLabel::np()], 20);
        assert_eq!(d.labels().len(), 1);
    }

    #[test]
    fn reproducible_and_valid() {
        let cfg = SynthConfig { n_instances: 60, seed: 4, ..SynthConfig::default() };
        let a = generate_synthetic(&cfg).unwrap();
        let b = generate_synthetic(&cfg).unwrap();
        assert_eq!(a, b);
        for x in &a {
            x.validate().unwrap();
            assert_eq!(x.n_channels(), 4);
            assert_eq!(x.len(), 150);
            assert!(x.original_length >= 100);
        }
        let c = generate_synthetic(&SynthConfig { seed: 5, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ie_matches_np_on_ventilator_channels() {
        // Same stream, same draws up to the extra effort: Pmask/Flow coincide.
        let cfg = SynthConfig { noise: 0.0, ..SynthConfig::default() };
        let np = one_instance(&ClassLabel::np(), &cfg, &mut SeededRng::new(1).rng());
        let ie = one_instance(&ClassLabel::ie(), &cfg, &mut SeededRng::new(1).rng());
        assert_eq!(np[0], ie[0]);
        assert_eq!(np[1], ie[1]);
        assert_ne!(np[2], ie[2]);
    }

    #[test]
    fn rejects_bad_proportions() {
        let cfg = SynthConfig {
            class_proportions: [(ClassLabel::np(), 0.5)].into_iter().collect(),
            ..SynthConfig::default()
        };
        assert!(generate_synthetic(&cfg).is_err());
    }
}
