//! Fixtures shared by the benchmarks.

use std::collections::BTreeMap;

use ship_core::discovery::discover;
use ship_core::pipeline::{generate_synthetic, SynthConfig};
use ship_core::{ClassLabel, Config, Dataset, ShapeletPool};

/// Balanced synthetic dataset of `n` instances.
pub fn dataset(n: usize) -> Dataset {
    let p: BTreeMap<ClassLabel, f64> = ClassLabel::KNOWN.iter().map(|&l| (l.into(), 0.25)).collect();
    generate_synthetic(&SynthConfig {
        n_instances: n,
        class_proportions: p,
        seed: 1,
        ..SynthConfig::default()
    })
    .expect("valid synthetic config")
}

/// Discovery settings small enough to run repeatedly.
pub fn small_config() -> Config {
    Config {
        max_sources_per_class: Some(4),
        ..Config::default()
    }
}

pub fn pool(data: &Dataset) -> ShapeletPool {
    discover(data, &small_config()).expect("discovery on synthetic data")
}
