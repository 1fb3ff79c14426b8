//! Classification head, training, metrics and k selection.

pub mod head;
pub mod metrics;
pub mod train;
pub mod tune;

pub use head::{forward, loss, Adam, HeadParams};
pub use metrics::{evaluate_predictions, majority_baseline, ClassMetrics, EvalReport};
pub use train::{evaluate, train, EpochRecord, ModelCheckpoint, TrainedHead};
pub use tune::{k_grid, stratified_folds, tune_k, tune_k_over, TuneResult};
