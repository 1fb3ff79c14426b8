use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShipError};
use crate::types::ClassLabel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Classification metrics. Overall precision, recall and F1 are
/// support-weighted averages of the per-class values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub labels: Vec<ClassLabel>,
    /// Rows are true classes, columns predicted classes, both in `labels` order.
    pub confusion: Vec<Vec<usize>>,
    pub per_class: BTreeMap<ClassLabel, ClassMetrics>,
    pub per_class_f1: BTreeMap<ClassLabel, f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub total: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Metrics for class-index predictions against class-index truth.
pub fn evaluate_predictions(labels: &[ClassLabel], truth: &[usize], predicted: &[usize]) -> Result<EvalReport> {
    if truth.len() != predicted.len() {
        return Err(ShipError::LengthMismatch {
            left: truth.len(),
            right: predicted.len(),
        });
    }
    let c = labels.len();
    if let Some(&bad) = truth.iter().chain(predicted).find(|&&i| i >= c) {
        return Err(ShipError::InvalidInput(format!("class index {bad} out of range for {c} classes")));
    }
    let mut confusion = vec![vec![0usize; c]; c];
    for (&t, &p) in truth.iter().zip(predicted) {
        confusion[t][p] += 1;
    }
    let total = truth.len();
    let tp: Vec<usize> = (0..c).map(|i| confusion[i][i]).collect();
    let support: Vec<usize> = confusion.iter().map(|row| row.iter().sum()).collect();
    let predicted_count: Vec<usize> = (0..c).map(|j| confusion.iter().map(|row| row[j]).sum()).collect();

    // Support-weighted mean of num/den. Multiplying before dividing keeps
    // the recall average (den = support) exactly equal to the accuracy.
    let weighted = |num: &[usize], den: &[usize]| -> f64 {
        if total == 0 {
            return 0.0;
        }
        let s: f64 = (0..c)
            .map(|i| {
                if den[i] == 0 {
                    0.0
                } else {
                    (support[i] as f64 * num[i] as f64) / den[i] as f64
                }
            })
            .sum();
        s / total as f64
    };
    // F1 = 2TP / (2TP + FP + FN) = 2TP / (support + predicted)
    let f1_num: Vec<usize> = tp.iter().map(|t| 2 * t).collect();
    let f1_den: Vec<usize> = (0..c).map(|i| support[i] + predicted_count[i]).collect();

    let mut per_class = BTreeMap::new();
    let mut per_class_f1 = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        let m = ClassMetrics {
            precision: ratio(tp[i], predicted_count[i]),
            recall: ratio(tp[i], support[i]),
            f1: ratio(f1_num[i], f1_den[i]),
            support: support[i],
        };
        per_class_f1.insert(label.clone(), m.f1);
        per_class.insert(label.clone(), m);
    }
    let macro_f1 = if c == 0 {
        0.0
    } else {
        labels.iter().map(|l| per_class_f1[l]).sum::<f64>() / c as f64
    };

    Ok(EvalReport {
        labels: labels.to_vec(),
        precision: weighted(&tp, &predicted_count),
        recall: weighted(&tp, &support),
        f1: weighted(&f1_num, &f1_den),
        accuracy: ratio(tp.iter().sum(), total),
        macro_f1,
        confusion,
        per_class,
        per_class_f1,
        total,
    })
}

/// Index of the largest probability; the first wins ties.
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// Predicts the training set's most frequent class for every instance.
pub fn majority_baseline(labels: &[ClassLabel], train: &[usize], truth: &[usize]) -> Result<EvalReport> {
    let mut counts = vec![0usize; labels.len()];
    for &y in train {
        counts[y] += 1;
    }
    let majority = argmax(&counts.iter().map(|&n| n as f64).collect::<Vec<_>>());
    evaluate_predictions(labels, truth, &vec![majority; truth.len()])
}
