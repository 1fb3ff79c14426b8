use rand::seq::SliceRandom;

use crate::error::{Result, ShipError};
use crate::rng::SeededRng;
use crate::types::Dataset;

/// Stratified random split. Each class contributes
/// `round(train_fraction * count)` instances to the first part, clamped so
/// both parts keep at least one. Both parts preserve dataset order.
pub fn split(dataset: &Dataset, train_fraction: f64, rng: &SeededRng) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(ShipError::InvalidConfig(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let mut in_train = vec![false; dataset.len()];
    for (ci, (label, &count)) in dataset.class_counts().iter().enumerate() {
        if count < 2 {
            return Err(ShipError::Stratification(format!(
                "class {label} has {count} instance(s); at least 2 are needed to split"
            )));
        }
        let mut idx: Vec<usize> = dataset
            .iter()
            .enumerate()
            .filter(|(_, x)| &x.label == label)
            .map(|(i, _)| i)
            .collect();
        idx.shuffle(&mut rng.derive(ci as u64).rng());
        let n_train = ((train_fraction * count as f64).round() as usize).clamp(1, count - 1);
        for &i in &idx[..n_train] {
            in_train[i] = true;
        }
    }
    let (train, rest): (Vec<_>, Vec<_>) = dataset
        .iter()
        .cloned()
        .zip(in_train)
        .partition(|(_, t)| *t);
    Ok((
        train.into_iter().map(|(x, _)| x).collect(),
        rest.into_iter().map(|(x, _)| x).collect(),
    ))
}
