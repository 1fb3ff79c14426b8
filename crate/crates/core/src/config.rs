use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, ShipError};

/// Optimizer and schedule for the classification head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation macro-F1 improvement before stopping.
    pub patience: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Widths of the two hidden layers.
    pub hidden: [usize; 2],
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 256,
            max_epochs: 100,
            patience: 10,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            hidden: [512, 256],
        }
    }
}

/// Full pipeline configuration. Deserializes from partial JSON; missing
/// fields take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Number of perceptually important points per channel.
    pub k: usize,
    /// Pool size; split evenly across classes.
    pub g: usize,
    /// Augmented copies generated per minority-class instance.
    pub r_sa: usize,
    pub noise_mu: f64,
    /// Noise standard deviation as a fraction of each channel's std.
    pub noise_sigma_scale: f64,
    pub logsig_depth: usize,
    pub channel_subset: Option<Vec<usize>>,
    pub seed: u64,
    /// Cap the on-span noise factor at 1.
    pub clamp_mask: bool,
    /// Z-normalize windows and shapelets before computing CID.
    pub z_normalize: bool,
    /// Candidate source instances drawn per class; `None` uses every instance.
    pub max_sources_per_class: Option<usize>,
    /// Re-run discovery on the augmented training set.
    pub rediscover_after_augment: bool,
    pub use_augmentation: bool,
    pub use_shapelet_features: bool,
    /// Fraction of the data used for training (the rest is the test split).
    pub train_fraction: f64,
    /// Fraction of the training split held out for early stopping.
    pub val_fraction: f64,
    pub train: TrainConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            k: 8,
            g: 40,
            r_sa: 10,
            noise_mu: 0.0,
            noise_sigma_scale: 0.1,
            logsig_depth: 2,
            channel_subset: None,
            seed: 0,
            clamp_mask: false,
            z_normalize: false,
            max_sources_per_class: Some(30),
            rediscover_after_augment: false,
            use_augmentation: true,
            use_shapelet_features: true,
            train_fraction: 0.8,
            val_fraction: 0.15,
            train: TrainConfig::default(),
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ShipError::InvalidConfig(m.to_string()));
        if self.k < 3 {
            return bad("k must be at least 3");
        }
        if self.logsig_depth == 0 {
            return bad("logsig_depth must be at least 1");
        }
        if !(self.noise_sigma_scale >= 0.0 && self.noise_sigma_scale.is_finite()) {
            return bad("noise_sigma_scale must be a finite non-negative number");
        }
        if !self.noise_mu.is_finite() {
            return bad("noise_mu must be finite");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train_fraction must lie in (0, 1)");
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return bad("val_fraction must lie in (0, 1)");
        }
        if matches!(&self.channel_subset, Some(c) if c.is_empty()) {
            return bad("channel_subset must not be empty");
        }
        if self.max_sources_per_class == Some(0) {
            return bad("max_sources_per_class must be positive");
        }
        let t = &self.train;
        if !(t.learning_rate > 0.0) || t.batch_size == 0 || t.patience == 0 {
            return bad("learning_rate, batch_size and patience must be positive");
        }
        if t.hidden.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        if !(0.0..1.0).contains(&t.beta1) || !(0.0..1.0).contains(&t.beta2) || !(t.adam_eps > 0.0) {
            return bad("invalid Adam parameters");
        }
        Ok(())
    }

    /// Shapelets selected per class for `n_classes` classes.
    pub fn per_class_quota(&self, n_classes: usize) -> usize {
        self.g.checked_div(n_classes).unwrap_or(0)
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
