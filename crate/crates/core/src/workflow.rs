//! End-to-end fitting: discovery, augmentation, transforms and the head.

use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::augment::balance_dataset;
use crate::config::Config;
use crate::discovery::discover;
use crate::error::Result;
use crate::features::{transform_dataset, FeatureMatrix, FeatureSpec};
use crate::model::metrics::EvalReport;
use crate::model::train::{evaluate, train, ModelCheckpoint};
use crate::pipeline::{split, subset_channels};
use crate::rng::{streams, SeededRng};
use crate::types::{Dataset, ShapeletPool};

/// Ablation variant selected by the feature switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Log-signature features only.
    Baseline,
    /// Shapelet features, no augmentation.
    Shapelets,
    /// Augmentation, no shapelet features.
    Augmentation,
    /// Both.
    Full,
}

impl Variant {
    pub fn of(config: &Config) -> Self {
        match (config.use_shapelet_features, config.use_augmentation) {
            (false, false) => Variant::Baseline,
            (true, false) => Variant::Shapelets,
            (false, true) => Variant::Augmentation,
            (true, true) => Variant::Full,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Shapelets => "S",
            Variant::Augmentation => "SA",
            Variant::Full => "S+SA",
        }
    }
}

pub fn feature_spec(config: &Config) -> FeatureSpec {
    FeatureSpec {
        shapelets: config.use_shapelet_features,
        logsig_depth: config.logsig_depth,
        z_normalize: config.z_normalize,
    }
}

/// Applies the configured channel subset, if any.
pub fn prepare(dataset: &Dataset, config: &Config) -> Result<Dataset> {
    match &config.channel_subset {
        Some(idx) => subset_channels(dataset, idx),
        None => Ok(dataset.clone()),
    }
}

/// Train, validation and test parts of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

/// Stratified test holdout, then a validation holdout from the training part.
pub fn split_for_run(dataset: &Dataset, config: &Config) -> Result<Splits> {
    let rng = SeededRng::new(config.seed).derive(streams::SPLIT);
    let (rest, test) = split(dataset, config.train_fraction, &rng.derive(0))?;
    let (train, val) = split(&rest, 1.0 - config.val_fraction, &rng.derive(1))?;
    Ok(Splits { train, val, test })
}

/// Wall-clock duration of one stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

fn timed<T>(timings: &mut Vec<StageTiming>, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f()?;
    timings.push(StageTiming {
        stage: stage.to_string(),
        seconds: start.elapsed().as_secs_f64(),
    });
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Fitted {
    pub pool: ShapeletPool,
    pub augmented: Dataset,
    pub checkpoint: ModelCheckpoint,
    pub train_features: FeatureMatrix,
    pub timings: Vec<StageTiming>,
}

/// Fits the full pipeline on `train`, early-stopping on `val`. Both must
/// already have the channel subset applied (see [`prepare`]).
pub fn fit(train_set: &Dataset, val_set: &Dataset, config: &Config, pool_path: Option<String>) -> Result<Fitted> {
    config.validate()?;
    let rng = SeededRng::new(config.seed);
    let needs_pool = config.use_shapelet_features || config.use_augmentation;

    let mut timings = Vec::new();

    let mut pool = if needs_pool {
        timed(&mut timings, "discover", || discover(train_set, config))?
    } else {
        ShapeletPool::default()
    };
    info!("pool: {} shapelets", pool.len());

    let augmented = if config.use_augmentation {
        timed(&mut timings, "augment", || {
            balance_dataset(train_set, &pool, config, &rng.derive(streams::AUGMENT))
        })?
    } else {
        train_set.clone()
    };
    if config.use_augmentation && config.rediscover_after_augment && config.use_shapelet_features {
        pool = timed(&mut timings, "rediscover", || discover(&augmented, config))?;
    }

    let spec = feature_spec(config);
    let (train_features, val_features) = timed(&mut timings, "transform", || {
        Ok((
            transform_dataset(&augmented, &pool, &spec)?,
            transform_dataset(val_set, &pool, &spec)?,
        ))
    })?;
    let classes = train_set.labels();
    let head = timed(&mut timings, "train", || {
        train(
            &train_features,
            &val_features,
            &classes,
            &config.train,
            &rng.derive(streams::TRAIN),
        )
    })?;
    info!("head: best epoch {} of {}", head.best_epoch, head.history.len());
    Ok(Fitted {
        checkpoint: ModelCheckpoint::new(head, spec, config, pool_path),
        pool,
        augmented,
        train_features,
        timings,
    })
}

/// Transforms `dataset` with the checkpoint's feature settings.
pub fn features_for(checkpoint: &ModelCheckpoint, pool: &ShapeletPool, dataset: &Dataset) -> Result<FeatureMatrix> {
    transform_dataset(dataset, pool, &checkpoint.features)
}

pub fn evaluate_dataset(checkpoint: &ModelCheckpoint, pool: &ShapeletPool, dataset: &Dataset) -> Result<EvalReport> {
    evaluate(checkpoint, &features_for(checkpoint, pool, dataset)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{generate_synthetic, SynthConfig};

    #[test]
    fn run_splits_partition_the_data() {
        let d = generate_synthetic(&SynthConfig { n_instances: 400, ..SynthConfig::default() }).unwrap();
        let cfg = Config::default();
        let s = split_for_run(&d, &cfg).unwrap();
        assert_eq!(s.train.len() + s.val.len() + s.test.len(), d.len());
        assert_eq!(s.test.labels(), d.labels());
        assert_eq!(s.val.labels(), d.labels());
        assert_eq!(split_for_run(&d, &cfg).unwrap(), s);
    }

    #[test]
    fn variant_names() {
        let mut cfg = Config::default();
        assert_eq!(Variant::of(&cfg).name(), "S+SA");
        cfg.use_augmentation = false;
        assert_eq!(Variant::of(&cfg), Variant::Shapelets);
        cfg.use_shapelet_features = false;
        assert_eq!(Variant::of(&cfg).name(), "baseline");
    }
}
