//! Classical fully-connected baseline with zero or one hidden layer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::qunit::argmax_lowest;
use crate::trainer::Evaluation;

/// Output layer and the loss paired with it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputKind {
    /// tanh outputs, squared error against one-hot {0, 1} targets.
    TanhMse,
    /// softmax outputs, cross-entropy.
    SoftmaxCrossEntropy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FcnnConfig {
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub output: OutputKind,
}

impl Default for FcnnConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 0,
            learning_rate: 0.1,
            epochs: 5000,
            seed: 0,
            output: OutputKind::TanhMse,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs × inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn random(inputs: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        let scale = 1.0 / (inputs as f64).sqrt();
        let mut l = Self::zeros(inputs, outputs);
        for w in &mut l.weights {
            *w = rng.gen_range(-scale..scale);
        }
        l
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }

    fn len(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FcnnModel {
    /// `d → N` or `d → h → N`; tanh follows every hidden layer.
    pub layers: Vec<Layer>,
    pub output: OutputKind,
}

struct Activations {
    hidden: Option<Vec<f64>>,
    out: Vec<f64>,
}

impl FcnnModel {
    /// All-zero weights; predicts class 0 for every input.
    pub fn zeros(d: usize, n: usize, hidden_dim: usize, output: OutputKind) -> Self {
        let layers = if hidden_dim == 0 {
            vec![Layer::zeros(d, n)]
        } else {
            vec![Layer::zeros(d, hidden_dim), Layer::zeros(hidden_dim, n)]
        };
        Self { layers, output }
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Layer::len).sum()
    }

    fn activate(&self, x: &[f64]) -> Activations {
        let (hidden, last_in) = if self.layers.len() == 2 {
            let h: Vec<f64> = self.layers[0].apply(x).into_iter().map(f64::tanh).collect();
            (Some(h), 1)
        } else {
            (None, 0)
        };
        let z = self.layers[last_in].apply(hidden.as_deref().unwrap_or(x));
        let out = match self.output {
            OutputKind::TanhMse => z.into_iter().map(f64::tanh).collect(),
            OutputKind::SoftmaxCrossEntropy => softmax(&z),
        };
        Activations { hidden, out }
    }

    pub fn outputs(&self, x: &[f64]) -> Vec<f64> {
        self.activate(x).out
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax_lowest(&self.outputs(x))
    }

    /// Mean loss over `split` and its gradient, flattened layer by layer
    /// (weights then bias).
    fn loss_and_gradient(&self, split: &LabeledDataset) -> (f64, Vec<Layer>, usize) {
        let mut grads: Vec<Layer> = self.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect();
        let mut loss = 0.0;
        let mut correct = 0;
        let m = split.len() as f64;
        let last = self.layers.len() - 1;
        for row in split.rows() {
            let act = self.activate(&row.features);
            let n = act.out.len();
            correct += usize::from(argmax_lowest(&act.out) == row.label);
            // δ at the output pre-activation
            let delta: Vec<f64> = match self.output {
                OutputKind::TanhMse => (0..n)
                    .map(|o| {
                        let target = if o == row.label { 1.0 } else { 0.0 };
                        let diff = act.out[o] - target;
                        loss += 0.5 * diff * diff / m;
                        diff * (1.0 - act.out[o] * act.out[o]) / m
                    })
                    .collect(),
                OutputKind::SoftmaxCrossEntropy => {
                    let p = act.out[row.label];
                    // NaN must survive the clamp so divergence is detected
                    let log_p = if p.is_nan() { p } else { p.max(f64::MIN_POSITIVE).ln() };
                    loss -= log_p / m;
                    (0..n)
                        .map(|o| (act.out[o] - f64::from(u8::from(o == row.label))) / m)
                        .collect()
                }
            };
            let input = act.hidden.as_deref().unwrap_or(&row.features);
            accumulate(&mut grads[last], &delta, input);
            if let Some(h) = &act.hidden {
                let out_layer = &self.layers[last];
                let dh: Vec<f64> = (0..out_layer.inputs)
                    .map(|j| {
                        let back: f64 = (0..out_layer.outputs)
                            .map(|o| out_layer.weights[o * out_layer.inputs + j] * delta[o])
                            .sum();
                        back * (1.0 - h[j] * h[j])
                    })
                    .collect();
                accumulate(&mut grads[0], &dh, &row.features);
            }
        }
        (loss, grads, correct)
    }

    pub fn loss(&self, split: &LabeledDataset) -> f64 {
        self.loss_and_gradient(split).0
    }

    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *w = it.next().expect("flat length matches the model");
            }
        }
    }

    /// Backpropagated gradient of [`FcnnModel::loss`], in [`FcnnModel::flat`] order.
    pub fn gradient(&self, split: &LabeledDataset) -> Vec<f64> {
        self.loss_and_gradient(split)
            .1
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }
}

fn accumulate(grad: &mut Layer, delta: &[f64], input: &[f64]) {
    for (o, dv) in delta.iter().enumerate() {
        grad.bias[o] += dv;
        let row = &mut grad.weights[o * grad.inputs..(o + 1) * grad.inputs];
        for (g, x) in row.iter_mut().zip(input) {
            *g += dv * x;
        }
    }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Loss and train accuracy before the update of one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct FcnnEpoch {
    pub epoch: usize,
    pub loss: f64,
    pub train_accuracy: f64,
}

/// Full-batch gradient descent from a seeded random start.
pub fn fcnn_train(split: &LabeledDataset, cfg: &FcnnConfig) -> Result<FcnnModel> {
    fcnn_train_logged(split, cfg).map(|(model, _)| model)
}

/// As [`fcnn_train`], also returning one [`FcnnEpoch`] per epoch.
pub fn fcnn_train_logged(split: &LabeledDataset, cfg: &FcnnConfig) -> Result<(FcnnModel, Vec<FcnnEpoch>)> {
    if cfg.learning_rate.is_nan() || cfg.learning_rate <= 0.0 {
        return Err(Error::InvalidInput("learning rate must be positive".into()));
    }
    if cfg.epochs == 0 {
        return Err(Error::InvalidInput("epochs must be positive".into()));
    }
    if split.is_empty() {
        return Err(Error::EmptyClass(0));
    }
    let (d, n) = (split.d(), split.n_classes());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let layers = if cfg.hidden_dim == 0 {
        vec![Layer::random(d, n, &mut rng)]
    } else {
        vec![
            Layer::random(d, cfg.hidden_dim, &mut rng),
            Layer::random(cfg.hidden_dim, n, &mut rng),
        ]
    };
    let mut model = FcnnModel {
        layers,
        output: cfg.output,
    };
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (loss, grads, correct) = model.loss_and_gradient(split);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, quantity: "loss" });
        }
        history.push(FcnnEpoch {
            epoch,
            loss,
            train_accuracy: 100.0 * correct as f64 / split.len() as f64,
        });
        for (l, g) in model.layers.iter_mut().zip(&grads) {
            for (w, gw) in l.weights.iter_mut().zip(&g.weights) {
                *w -= cfg.learning_rate * gw;
            }
            for (b, gb) in l.bias.iter_mut().zip(&g.bias) {
                *b -= cfg.learning_rate * gb;
            }
        }
        if model.flat().iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged { epoch, quantity: "weights" });
        }
    }
    Ok((model, history))
}

pub fn fcnn_evaluate(model: &FcnnModel, split: &LabeledDataset) -> Evaluation {
    let predictions: Vec<usize> = split.rows().iter().map(|r| model.predict(&r.features)).collect();
    Evaluation::from_predictions(&predictions, split)
}

/// (quantum, classical) trainable-parameter counts.
///
/// The quantum model has d + N² − 1. The classical zero-hidden count is the
/// (N + 1)·d tally used in the comparison tables; with a hidden layer it is
/// the exact (d + 1)·h + (h + 1)·N.
pub fn parameter_counts(d: usize, n: usize, hidden_dim: usize) -> (usize, usize) {
    let quantum = d + n * n - 1;
    let classical = if hidden_dim == 0 {
        (n + 1) * d
    } else {
        (d + 1) * hidden_dim + (hidden_dim + 1) * n
    };
    (quantum, classical)
}
