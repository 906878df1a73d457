use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mnist::MnistDataset;
use crate::error::{Error, Result};
use crate::linalg::dgemm_strided;

/// Layer widths from input to output; hidden layers use ReLU and the output
/// feeds softmax cross-entropy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArchitecture {
    pub layer_sizes: Vec<usize>,
}

impl MlpArchitecture {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        let arch = Self { layer_sizes };
        arch.validate()?;
        Ok(arch)
    }

    pub fn full_scale() -> Self {
        Self {
            layer_sizes: vec![784, 500, 300, 10],
        }
    }

    pub fn desk_scale() -> Self {
        Self {
            layer_sizes: vec![784, 50, 30, 10],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::InvalidParameter(
                "network needs an input and an output layer".into(),
            ));
        }
        if self.layer_sizes.contains(&0) {
            return Err(Error::InvalidParameter("layer sizes must be positive".into()));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn classes(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }
}

/// Affine map `a ↦ a·W + b` with `W` stored `fan_in × fan_out` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Network parameters; also used as the container for gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
}

impl MlpParams {
    pub fn zeros(arch: &MlpArchitecture) -> Self {
        let layers = arch
            .layer_sizes
            .windows(2)
            .map(|w| Layer {
                fan_in: w[0],
                fan_out: w[1],
                weights: vec![0.0; w[0] * w[1]],
                bias: vec![0.0; w[1]],
            })
            .collect();
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in
    }

    pub fn classes(&self) -> usize {
        self.layers.last().unwrap().fan_out
    }

    /// Every weight and bias, layer by layer.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn coordinate_mut(&mut self, mut idx: usize) -> &mut f64 {
        for l in &mut self.layers {
            if idx < l.weights.len() {
                return &mut l.weights[idx];
            }
            idx -= l.weights.len();
            if idx < l.bias.len() {
                return &mut l.bias[idx];
            }
            idx -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// `self ← self − lr·grad`.
    pub fn sgd_step(&mut self, grad: &MlpParams, lr: f64) {
        for (l, g) in self.layers.iter_mut().zip(&grad.layers) {
            for (w, gw) in l.weights.iter_mut().zip(&g.weights) {
                *w -= lr * gw;
            }
            for (b, gb) in l.bias.iter_mut().zip(&g.bias) {
                *b -= lr * gb;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }
}

/// Weights iid `N(0, 1/fan_in)`, biases zero.
pub fn init_params<R: Rng + ?Sized>(arch: &MlpArchitecture, rng: &mut R) -> Result<MlpParams> {
    arch.validate()?;
    let mut params = MlpParams::zeros(arch);
    for l in &mut params.layers {
        let s = 1.0 / (l.fan_in as f64).sqrt();
        for w in &mut l.weights {
            *w = s * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(params)
}

/// Rows of inputs with their labels.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub inputs: &'a [f64],
    pub labels: &'a [u8],
}

impl<'a> Batch<'a> {
    pub fn new(inputs: &'a [f64], labels: &'a [u8]) -> Self {
        Self { inputs, labels }
    }

    pub fn of(dataset: &'a MnistDataset) -> Self {
        Self {
            inputs: dataset.images(),
            labels: dataset.labels(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn check_batch(params: &MlpParams, batch: &Batch<'_>) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidParameter("empty batch".into()));
    }
    let dim = params.input_dim();
    if batch.inputs.len() != batch.len() * dim {
        return Err(Error::DimensionMismatch {
            expected: batch.len() * dim,
            actual: batch.inputs.len(),
        });
    }
    let classes = params.classes();
    if let Some(&bad) = batch.labels.iter().find(|&&l| l as usize >= classes) {
        return Err(Error::InvalidParameter(format!("label {bad} outside 0..{classes}")));
    }
    Ok(())
}

/// Pre-activations of every layer; hidden ones are rectified in place in
/// the returned activations.
struct Trace {
    /// `activations[0]` is the input copy; `activations[l]` is the post-ReLU
    /// output of layer `l` for hidden layers and the logits for the last.
    activations: Vec<Vec<f64>>,
}

fn forward_trace(params: &MlpParams, inputs: &[f64], rows: usize) -> Trace {
    let mut activations = Vec::with_capacity(params.layers.len() + 1);
    activations.push(inputs.to_vec());
    let last = params.layers.len() - 1;
    for (li, l) in params.layers.iter().enumerate() {
        let a = activations.last().unwrap();
        let mut z = vec![0.0; rows * l.fan_out];
        for row in z.chunks_exact_mut(l.fan_out) {
            row.copy_from_slice(&l.bias);
        }
        dgemm_strided(
            rows, l.fan_in, l.fan_out, 1.0, a, l.fan_in, 1, &l.weights, l.fan_out, 1, 1.0, &mut z,
        );
        if li < last {
            z.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        activations.push(z);
    }
    Trace { activations }
}

/// Per-row `−log softmax(logits)[label]`, and optionally the softmax.
fn cross_entropy(logits: &[f64], labels: &[u8], classes: usize, probs: Option<&mut Vec<f64>>) -> f64 {
    let mut total = 0.0;
    let mut probs = probs;
    if let Some(p) = probs.as_deref_mut() {
        p.resize(logits.len(), 0.0);
    }
    for (r, row) in logits.chunks_exact(classes).enumerate() {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|v| (v - m).exp()).sum();
        let lse = m + sum.ln();
        total += lse - row[labels[r] as usize];
        if let Some(p) = probs.as_deref_mut() {
            for (c, v) in row.iter().enumerate() {
                p[r * classes + c] = (v - lse).exp();
            }
        }
    }
    total
}

/// Mean cross-entropy over the batch.
pub fn forward_cost(params: &MlpParams, batch: &Batch<'_>) -> Result<f64> {
    check_batch(params, batch)?;
    let trace = forward_trace(params, batch.inputs, batch.len());
    let total = cross_entropy(trace.activations.last().unwrap(), batch.labels, params.classes(), None);
    Ok(total / batch.len() as f64)
}

/// Batch cost and its exact gradient (ReLU derivative taken as 0 at 0).
pub fn cost_and_gradient(params: &MlpParams, batch: &Batch<'_>) -> Result<(f64, MlpParams)> {
    check_batch(params, batch)?;
    let rows = batch.len();
    let classes = params.classes();
    let trace = forward_trace(params, batch.inputs, rows);
    let mut delta = Vec::new();
    let total = cross_entropy(
        trace.activations.last().unwrap(),
        batch.labels,
        classes,
        Some(&mut delta),
    );
    let inv = 1.0 / rows as f64;
    for (r, &lab) in batch.labels.iter().enumerate() {
        delta[r * classes + lab as usize] -= 1.0;
    }
    delta.iter_mut().for_each(|v| *v *= inv);

    let mut grad = MlpParams {
        layers: params
            .layers
            .iter()
            .map(|l| Layer {
                fan_in: l.fan_in,
                fan_out: l.fan_out,
                weights: vec![0.0; l.weights.len()],
                bias: vec![0.0; l.bias.len()],
            })
            .collect(),
    };
    for li in (0..params.layers.len()).rev() {
        let l = &params.layers[li];
        let a = &trace.activations[li];
        let g = &mut grad.layers[li];
        // dW = aᵀ δ
        dgemm_strided(
            l.fan_in,
            rows,
            l.fan_out,
            1.0,
            a,
            1,
            l.fan_in,
            &delta,
            l.fan_out,
            1,
            0.0,
            &mut g.weights,
        );
        for row in delta.chunks_exact(l.fan_out) {
            for (gb, d) in g.bias.iter_mut().zip(row) {
                *gb += d;
            }
        }
        if li > 0 {
            // δ_prev = (δ Wᵀ) ⊙ 1[a > 0]
            let mut prev = vec![0.0; rows * l.fan_in];
            dgemm_strided(
                rows, l.fan_out, l.fan_in, 1.0, &delta, l.fan_out, 1, &l.weights, 1, l.fan_out, 0.0, &mut prev,
            );
            for (p, &act) in prev.iter_mut().zip(a) {
                if act <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }
    Ok((total * inv, grad))
}

pub fn backward(params: &MlpParams, batch: &Batch<'_>) -> Result<MlpParams> {
    cost_and_gradient(params, batch).map(|(_, g)| g)
}

const EVAL_CHUNK: usize = 1000;

/// Mean cross-entropy over a whole dataset, evaluated in chunks.
pub fn dataset_cost(params: &MlpParams, dataset: &MnistDataset) -> Result<f64> {
    let dim = dataset.dim();
    let mut total = 0.0;
    for start in (0..dataset.len()).step_by(EVAL_CHUNK) {
        let end = (start + EVAL_CHUNK).min(dataset.len());
        let batch = Batch::new(&dataset.images()[start * dim..end * dim], &dataset.labels()[start..end]);
        total += forward_cost(params, &batch)? * (end - start) as f64;
    }
    Ok(total / dataset.len() as f64)
}

/// Fraction of samples whose largest logit is the label (first index wins ties).
pub fn accuracy(params: &MlpParams, dataset: &MnistDataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::InvalidParameter("accuracy of an empty dataset".into()));
    }
    check_batch(params, &Batch::of(dataset))?;
    let dim = dataset.dim();
    let classes = params.classes();
    let mut correct = 0usize;
    for start in (0..dataset.len()).step_by(EVAL_CHUNK) {
        let end = (start + EVAL_CHUNK).min(dataset.len());
        let trace = forward_trace(params, &dataset.images()[start * dim..end * dim], end - start);
        let logits = trace.activations.last().unwrap();
        for (r, row) in logits.chunks_exact(classes).enumerate() {
            let mut best = 0;
            for c in 1..classes {
                if row[c] > row[best] {
                    best = c;
                }
            }
            if best == dataset.labels()[start + r] as usize {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}
