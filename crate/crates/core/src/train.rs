//! Loss, optimizer, initialisation and the mini-batch training loop.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{model_backward, model_forward, Matrix, Mode, ModelParams, ModelSpec, ParamSet};
use crate::series::WindowedDataset;

/// Mean squared error and its gradient with respect to `pred`.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.is_empty() {
        return Err(Error::invalid("loss", "empty prediction vector"));
    }
    if pred.len() != target.len() {
        return Err(Error::dim("loss targets", pred.len(), target.len()));
    }
    let n = pred.len() as f64;
    let loss = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n;
    let grad = pred.iter().zip(target).map(|(p, t)| 2.0 * (p - t) / n).collect();
    Ok((loss, grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::invalid("lr", format!("{} must be positive", self.lr)));
        }
        for (field, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::invalid(field, format!("{b} is outside (0, 1)")));
            }
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::invalid("eps", format!("{} must be positive", self.eps)));
        }
        Ok(())
    }
}

/// First and second moment estimates, flattened in [`ParamSet`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(num_values: usize, config: AdamConfig) -> Self {
        AdamState {
            config,
            m: vec![0.0; num_values],
            v: vec![0.0; num_values],
            t: 0,
        }
    }

    pub fn for_params<P: ParamSet>(params: &P, config: AdamConfig) -> Self {
        Self::new(params.num_values(), config)
    }
}

/// One bias-corrected Adam update of `params` using `grads`.
pub fn adam_step<P: ParamSet>(params: &mut P, grads: &P, state: &mut AdamState) -> Result<()> {
    let n = params.num_values();
    if grads.num_values() != n || state.m.len() != n {
        return Err(Error::dim("adam state", n, grads.num_values().min(state.m.len())));
    }
    let AdamConfig { lr, beta1, beta2, eps } = state.config;
    state.t += 1;
    let t = i32::try_from(state.t).unwrap_or(i32::MAX);
    let correct1 = 1.0 - beta1.powi(t);
    let correct2 = 1.0 - beta2.powi(t);

    let mut k = 0;
    for (ps, gs) in params.slices_mut().into_iter().zip(grads.slices()) {
        for (p, &g) in ps.iter_mut().zip(gs) {
            let m = beta1 * state.m[k] + (1.0 - beta1) * g;
            let v = beta2 * state.v[k] + (1.0 - beta2) * g * g;
            state.m[k] = m;
            state.v[k] = v;
            *p -= lr * (m / correct1) / ((v / correct2).sqrt() + eps);
            k += 1;
        }
    }
    Ok(())
}

/// Deterministic initial weights for `spec`.
///
/// Input-to-hidden blocks are Glorot-uniform over the fan of the four
/// stacked gates, recurrent blocks are slices of one orthogonal matrix,
/// biases are zero except the forget gate which starts at 1.
pub fn init_params(spec: &ModelSpec, seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ModelParams::zeros(spec);
    init_lstm(&mut params.lstm1, spec.input_dim, spec.hidden1, &mut rng);
    init_lstm(&mut params.lstm2, spec.hidden1, spec.hidden2, &mut rng);

    let limit = (6.0 / (spec.hidden2 + spec.output_dim) as f64).sqrt();
    for w in params.dense.w.as_mut_slice() {
        *w = rng.random_range(-limit..limit);
    }
    params
}

fn init_lstm(p: &mut crate::nn::LstmCellParams, input_dim: usize, hidden: usize, rng: &mut ChaCha8Rng) {
    let limit = (6.0 / (input_dim + 4 * hidden) as f64).sqrt();
    let recurrent = orthonormal_columns(4 * hidden, hidden, rng);
    let gates = [&mut p.w_input, &mut p.w_forget, &mut p.w_candidate, &mut p.w_output];
    for (g, w) in gates.into_iter().enumerate() {
        for j in 0..hidden {
            for c in 0..hidden {
                w.set(j, c, recurrent.get(g * hidden + j, c));
            }
            for i in 0..input_dim {
                w.set(j, hidden + i, rng.random_range(-limit..limit));
            }
        }
    }
    p.b_forget.fill(1.0);
}

/// A `rows × cols` matrix (rows ≥ cols) with orthonormal columns, from
/// Gram-Schmidt on a Gaussian matrix with the sign convention that makes
/// the QR factor's diagonal positive.
fn orthonormal_columns(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    debug_assert!(rows >= cols);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while columns.len() < cols {
        let mut v: Vec<f64> = (0..rows).map(|_| rng.sample(StandardNormal)).collect();
        // Two passes of modified Gram-Schmidt for numerical orthogonality.
        for _ in 0..2 {
            for q in &columns {
                let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= d * qi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-10 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        columns.push(v);
    }
    Matrix::from_fn(rows, cols, |r, c| columns[c][r])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1200,
            batch_size: 32,
            adam: AdamConfig::default(),
            seed: 42,
            shuffle: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        self.adam.validate()
    }
}

/// Per-epoch mean training loss, in scaled units.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LossHistory(pub Vec<f64>);

impl LossHistory {
    pub fn last(&self) -> Option<f64> {
        self.0.last().copied()
    }

    /// `epoch,loss` CSV, epochs numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss\n");
        for (k, l) in self.0.iter().enumerate() {
            out.push_str(&format!("{},{}\n", k + 1, l));
        }
        out
    }
}

/// Trains a freshly initialised model on an already-scaled dataset.
pub fn train(spec: &ModelSpec, dataset: &WindowedDataset, config: &TrainConfig) -> Result<(ModelParams, LossHistory)> {
    let params = init_params(spec, config.seed);
    train_from(spec, params, dataset, config)
}

/// Continues training from `params`. Each epoch visits every sample exactly
/// once in `ceil(n / batch_size)` Adam steps, the last batch possibly short.
pub fn train_from(
    spec: &ModelSpec,
    mut params: ModelParams,
    dataset: &WindowedDataset,
    config: &TrainConfig,
) -> Result<(ModelParams, LossHistory)> {
    spec.validate()?;
    config.validate()?;
    params.check_shapes(spec)?;
    if dataset.is_empty() {
        return Err(Error::invalid("dataset", "no training samples"));
    }
    if dataset.window() != spec.window_len() {
        return Err(Error::dim("training window", spec.window_len(), dataset.window()));
    }

    // Dropout and shuffling draw from a stream distinct from initialisation.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9E37_79B9_7F4A_7C15);
    let mut adam = AdamState::for_params(&params, config.adam);
    let mut grads = ModelParams::zeros(spec);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut preds = Vec::with_capacity(batch.len());
            let mut caches = Vec::with_capacity(batch.len());
            for &k in batch {
                let (p, cache) = model_forward(spec, &params, &dataset.inputs[k], &mut Mode::Train(&mut rng))?;
                preds.push(p);
                caches.push(cache);
            }
            let targets: Vec<f64> = batch.iter().map(|&k| dataset.targets[k]).collect();
            let (loss, grad) = mse_loss(&preds, &targets)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }

            grads.fill(0.0);
            for (cache, g) in caches.iter().zip(&grad) {
                model_backward(spec, &params, cache, *g, &mut grads)?;
            }
            adam_step(&mut params, &grads, &mut adam)?;
            total += loss * batch.len() as f64;
        }
        let epoch_loss = total / dataset.len() as f64;
        if !epoch_loss.is_finite() || params.slices().iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::Diverged { epoch });
        }
        history.push(epoch_loss);
    }
    Ok((params, LossHistory(history)))
}

/// Inference-mode predictions for every sample of `dataset`.
pub fn predict(spec: &ModelSpec, params: &ModelParams, dataset: &WindowedDataset) -> Result<Vec<f64>> {
    dataset
        .inputs
        .iter()
        .map(|w| model_forward(spec, params, w, &mut Mode::Infer).map(|(p, _)| p))
        .collect()
}
