//! Three-layer classification head: `d -> h1 -> h2 -> |Y|` with ReLU after
//! the first two layers and a softmax output.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShipError};
use crate::rng::SeededRng;

/// Probability floor used by the cross-entropy loss.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// `fan_in × fan_out`
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Dense {
            w: Array2::zeros((fan_in, fan_out)),
            b: Array1::zeros(fan_out),
        }
    }

    fn uniform(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        Dense {
            w: Array2::from_shape_fn((fan_in, fan_out), |_| rng.random_range(-bound..bound)),
            b: Array1::from_shape_fn(fan_out, |_| rng.random_range(-bound..bound)),
        }
    }
}

/// Weights of the three layers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeadParams {
    pub layers: [Dense; 3],
}

impl HeadParams {
    pub fn zeros(d: usize, hidden: [usize; 2], classes: usize) -> Self {
        HeadParams {
            layers: [
                Dense::zeros(d, hidden[0]),
                Dense::zeros(hidden[0], hidden[1]),
                Dense::zeros(hidden[1], classes),
            ],
        }
    }

    /// Fan-in scaled uniform initialization, `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn init(d: usize, hidden: [usize; 2], classes: usize, rng: &SeededRng) -> Self {
        let mut g = rng.rng();
        HeadParams {
            layers: [
                Dense::uniform(d, hidden[0], &mut g),
                Dense::uniform(hidden[0], hidden[1], &mut g),
                Dense::uniform(hidden[1], classes, &mut g),
            ],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.layers[2].w.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().chain(l.b.iter()).all(|v| v.is_finite()))
    }

    /// Visits every parameter of `self` alongside the matching one of `other`.
    pub fn zip_mut_with(&mut self, other: &HeadParams, mut f: impl FnMut(&mut f64, f64)) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.w.zip_mut_with(&b.w, |x, &y| f(x, y));
            a.b.zip_mut_with(&b.b, |x, &y| f(x, y));
        }
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Parameter by flat index (layer-major; weights before biases).
    pub fn get_mut(&mut self, mut index: usize) -> &mut f64 {
        for l in &mut self.layers {
            if index < l.w.len() {
                let cols = l.w.ncols();
                return &mut l.w[[index / cols, index % cols]];
            }
            index -= l.w.len();
            if index < l.b.len() {
                return &mut l.b[index];
            }
            index -= l.b.len();
        }
        panic!("parameter index out of range")
    }

    pub fn get(&self, mut index: usize) -> f64 {
        for l in &self.layers {
            if index < l.w.len() {
                let cols = l.w.ncols();
                return l.w[[index / cols, index % cols]];
            }
            index -= l.w.len();
            if index < l.b.len() {
                return l.b[index];
            }
            index -= l.b.len();
        }
        panic!("parameter index out of range")
    }
}

/// Intermediate activations of a batch forward pass.
pub struct Activations {
    pub h1: Array2<f64>,
    pub h2: Array2<f64>,
    pub probs: Array2<f64>,
}

fn relu(mut a: Array2<f64>) -> Array2<f64> {
    a.mapv_inplace(|v| v.max(0.0));
    a
}

fn softmax_rows(mut logits: Array2<f64>) -> Array2<f64> {
    for mut row in logits.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    logits
}

/// Batch forward pass; `x` is `n × d`.
pub fn forward_batch(params: &HeadParams, x: ArrayView2<f64>) -> Activations {
    let [l1, l2, l3] = &params.layers;
    let h1 = relu(x.dot(&l1.w) + &l1.b);
    let h2 = relu(h1.dot(&l2.w) + &l2.b);
    let probs = softmax_rows(h2.dot(&l3.w) + &l3.b);
    Activations { h1, h2, probs }
}

/// Class probabilities for one feature vector.
pub fn forward(params: &HeadParams, z: &[f64]) -> Result<Vec<f64>> {
    if z.len() != params.input_dim() {
        return Err(ShipError::LengthMismatch {
            left: z.len(),
            right: params.input_dim(),
        });
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(ShipError::NonFiniteInput);
    }
    let x = ArrayView2::from_shape((1, z.len()), z).expect("row vector");
    Ok(forward_batch(params, x).probs.row(0).to_vec())
}

/// Cross-entropy of one prediction, `-ln(max(p[label], 1e-12))`.
pub fn loss(probs: &[f64], label: usize) -> f64 {
    -probs[label].max(PROB_FLOOR).ln()
}

/// Mean cross-entropy over a batch.
pub fn mean_loss(probs: &Array2<f64>, labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    probs
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(p, &y)| -p[y].max(PROB_FLOOR).ln())
        .sum::<f64>()
        / n
}

/// Mean cross-entropy and its gradient with respect to every parameter.
pub fn loss_and_gradient(params: &HeadParams, x: ArrayView2<f64>, labels: &[usize]) -> (f64, HeadParams) {
    let n = labels.len() as f64;
    let act = forward_batch(params, x);
    let loss = mean_loss(&act.probs, labels);
    let [_, l2, l3] = &params.layers;

    let mut d3 = act.probs;
    for (mut row, &y) in d3.rows_mut().into_iter().zip(labels) {
        row[y] -= 1.0;
    }
    d3.mapv_inplace(|v| v / n);
    let g3 = Dense {
        w: act.h2.t().dot(&d3),
        b: d3.sum_axis(Axis(0)),
    };

    let mut d2 = d3.dot(&l3.w.t());
    d2.zip_mut_with(&act.h2, |g, &h| {
        if h <= 0.0 {
            *g = 0.0
        }
    });
    let g2 = Dense {
        w: act.h1.t().dot(&d2),
        b: d2.sum_axis(Axis(0)),
    };

    let mut d1 = d2.dot(&l2.w.t());
    d1.zip_mut_with(&act.h1, |g, &h| {
        if h <= 0.0 {
            *g = 0.0
        }
    });
    let g1 = Dense {
        w: x.t().dot(&d1),
        b: d1.sum_axis(Axis(0)),
    };

    (loss, HeadParams { layers: [g1, g2, g3] })
}

/// Adaptive-moment optimizer state.
#[derive(Clone, Debug)]
pub struct Adam {
    m: HeadParams,
    v: HeadParams,
    step: i32,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(params: &HeadParams, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        let mut zero = params.clone();
        zero.zip_mut_with(params, |a, _| *a = 0.0);
        Adam {
            m: zero.clone(),
            v: zero,
            step: 0,
            lr,
            beta1,
            beta2,
            eps,
        }
    }

    pub fn step(&mut self, params: &mut HeadParams, grad: &HeadParams) {
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        self.m.zip_mut_with(grad, |m, g| *m = b1 * *m + (1.0 - b1) * g);
        self.v.zip_mut_with(grad, |v, g| *v = b2 * *v + (1.0 - b2) * g * g);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let (lr, eps) = (self.lr, self.eps);
        // Walk m and v in lockstep with the parameters.
        let mut m_hat = self.m.clone();
        m_hat.zip_mut_with(&self.v, |m, v| *m = (*m / c1) / ((v / c2).sqrt() + eps));
        params.zip_mut_with(&m_hat, |p, u| *p -= lr * u);
    }
}
