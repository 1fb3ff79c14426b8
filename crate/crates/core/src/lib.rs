//! Shapelet-based interpretable classification of patient-ventilator
//! asynchrony in multichannel breath waveforms.
//!
//! The pipeline discovers class-balanced shapelet pools from perceptually
//! important points, augments minority classes with shapelet-guided noise,
//! maps every instance to shapelet distances plus log-signature statistics,
//! and classifies the result with a small trained head. The distances to the
//! predicted class's shapelets explain each decision.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augment;
pub mod config;
pub mod discovery;
pub mod distance;
pub mod error;
pub mod features;
pub mod io;
pub mod model;
pub mod pip;
pub mod pipeline;
pub mod rng;
pub mod types;
pub mod workflow;

pub use config::{Config, TrainConfig};
pub use distance::MatchResult;
pub use error::{Result, ShipError};
pub use features::{FeatureMatrix, FeatureScaler, FeatureVector};
pub use model::{EvalReport, HeadParams, ModelCheckpoint};
pub use rng::{derive_stream, SeededRng};
pub use types::{ClassLabel, Dataset, LabeledSeries, Shapelet, ShapeletPool};
