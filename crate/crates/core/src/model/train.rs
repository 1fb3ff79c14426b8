//! Minibatch training of the head with early stopping on validation macro-F1.

use log::debug;
use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::head::{forward, forward_batch, loss_and_gradient, mean_loss, Adam, HeadParams};
use super::metrics::{argmax, evaluate_predictions, EvalReport};
use crate::config::{Config, TrainConfig};
use crate::error::{Result, ShipError};
use crate::features::{FeatureMatrix, FeatureScaler, FeatureSpec};
use crate::rng::SeededRng;
use crate::types::ClassLabel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_macro_f1: f64,
}

/// Output of [`train`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedHead {
    pub labels: Vec<ClassLabel>,
    pub params: HeadParams,
    pub scaler: FeatureScaler,
    /// 0 when no epoch ran and the initialization was kept.
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

/// Everything needed to classify new instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckpoint {
    pub labels: Vec<ClassLabel>,
    pub params: HeadParams,
    pub scaler: FeatureScaler,
    pub features: FeatureSpec,
    pub config: Config,
    pub config_hash: String,
    /// Pool file, relative to the checkpoint's directory.
    pub pool_path: Option<String>,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

impl ModelCheckpoint {
    pub fn new(head: TrainedHead, features: FeatureSpec, config: &Config, pool_path: Option<String>) -> Self {
        ModelCheckpoint {
            labels: head.labels,
            params: head.params,
            scaler: head.scaler,
            features,
            config: config.clone(),
            config_hash: config.fingerprint(),
            pool_path,
            best_epoch: head.best_epoch,
            history: head.history,
        }
    }

    /// Class probabilities for an unscaled feature vector.
    pub fn predict_proba(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.scaler.dim() {
            return Err(ShipError::LengthMismatch {
                left: z.len(),
                right: self.scaler.dim(),
            });
        }
        forward(&self.params, &self.scaler.apply(z))
    }

    pub fn predict(&self, z: &[f64]) -> Result<ClassLabel> {
        Ok(self.labels[argmax(&self.predict_proba(z)?)].clone())
    }
}

/// Class indices of `labels` within `classes`.
pub fn label_indices(classes: &[ClassLabel], labels: &[ClassLabel]) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|l| {
            classes
                .iter()
                .position(|c| c == l)
                .ok_or_else(|| ShipError::InvalidInput(format!("unknown class {l}")))
        })
        .collect()
}

fn scaled_matrix(rows: &[Vec<f64>], scaler: &FeatureScaler) -> Result<Array2<f64>> {
    let d = scaler.dim();
    let mut flat = Vec::with_capacity(rows.len() * d);
    for r in rows {
        if r.len() != d {
            return Err(ShipError::LengthMismatch { left: r.len(), right: d });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(ShipError::NonFiniteInput);
        }
        flat.extend(scaler.apply(r));
    }
    Ok(Array2::from_shape_vec((rows.len(), d), flat).expect("shape"))
}

/// Trains a head on `train`, keeping the parameters with the best
/// validation macro-F1 (lower validation loss breaks ties).
///
/// `classes` fixes the output order; every label in both splits must be in it.
pub fn train(
    train: &FeatureMatrix,
    val: &FeatureMatrix,
    classes: &[ClassLabel],
    cfg: &TrainConfig,
    rng: &SeededRng,
) -> Result<TrainedHead> {
    if train.is_empty() || val.is_empty() {
        return Err(ShipError::InvalidInput("training and validation splits must be non-empty".into()));
    }
    if train.dim() != val.dim() {
        return Err(ShipError::LengthMismatch {
            left: train.dim(),
            right: val.dim(),
        });
    }
    let scaler = FeatureScaler::fit(&train.rows)?;
    let x = scaled_matrix(&train.rows, &scaler)?;
    let xv = scaled_matrix(&val.rows, &scaler)?;
    let y = label_indices(classes, &train.labels)?;
    let yv = label_indices(classes, &val.labels)?;

    let mut params = HeadParams::init(train.dim(), cfg.hidden, classes.len(), &rng.derive(0));
    let mut adam = Adam::new(&params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps);

    let mut best = params.clone();
    let mut best_epoch = 0;
    let mut best_score: Option<(f64, f64)> = None;
    let mut stale = 0;
    let mut history = Vec::new();
    let mut order: Vec<usize> = (0..y.len()).collect();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng.derive(epoch as u64).rng());
        let mut total_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let xb = x.select(Axis(0), batch);
            let yb: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
            let (loss, grad) = loss_and_gradient(&params, xb.view(), &yb);
            if !loss.is_finite() {
                return Err(ShipError::Diverged { epoch, loss });
            }
            total_loss += loss * batch.len() as f64;
            adam.step(&mut params, &grad);
        }
        if !params.is_finite() {
            return Err(ShipError::Diverged { epoch, loss: f64::NAN });
        }

        let probs = forward_batch(&params, xv.view()).probs;
        let val_loss = mean_loss(&probs, &yv);
        let pred: Vec<usize> = probs.rows().into_iter().map(|r| argmax(r.as_slice().expect("row"))).collect();
        let val_macro_f1 = evaluate_predictions(classes, &yv, &pred)?.macro_f1;
        let record = EpochRecord {
            epoch,
            train_loss: total_loss / y.len() as f64,
            val_loss,
            val_macro_f1,
        };
        debug!("{record:?}");
        history.push(record);

        let improved = best_score.is_none_or(|(f, l)| val_macro_f1 > f || (val_macro_f1 == f && val_loss < l));
        if improved {
            best_score = Some((val_macro_f1, val_loss));
            best = params.clone();
            best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }

    Ok(TrainedHead {
        labels: classes.to_vec(),
        params: best,
        scaler,
        best_epoch,
        history,
    })
}

/// Metrics of a checkpoint on unscaled features.
pub fn evaluate(checkpoint: &ModelCheckpoint, features: &FeatureMatrix) -> Result<EvalReport> {
    let truth = label_indices(&checkpoint.labels, &features.labels)?;
    let pred = features
        .rows
        .iter()
        .map(|z| checkpoint.predict_proba(z).map(|p| argmax(&p)))
        .collect::<Result<Vec<_>>>()?;
    evaluate_predictions(&checkpoint.labels, &truth, &pred)
}
