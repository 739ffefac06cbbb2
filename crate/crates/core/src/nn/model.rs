use serde::{Deserialize, Serialize};

use super::dense::{dense_backward, dense_forward, DenseCache, DenseParams};
use super::dropout::{dropout_backward, dropout_forward, Mode};
use super::lstm::{lstm_cell_backward, lstm_cell_forward, LstmCellCache, LstmCellParams, LstmCellState};
use super::ParamSet;
use crate::error::{Error, Result};

/// Shape of the forecasting network:
/// `LSTM(hidden1) → Dropout → LSTM(hidden2) → Dropout → Dense(1)`.
///
/// The input window holds `timesteps · input_dim` values. With the default
/// `timesteps = 1` the whole window enters as the features of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub input_dim: usize,
    pub timesteps: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub dropout_rate: f64,
    pub output_dim: usize,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            input_dim: 3,
            timesteps: 1,
            hidden1: 12,
            hidden2: 12,
            dropout_rate: 0.2,
            output_dim: 1,
        }
    }
}

impl ModelSpec {
    pub fn window_len(&self) -> usize {
        self.input_dim * self.timesteps
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("input_dim", self.input_dim),
            ("timesteps", self.timesteps),
            ("hidden1", self.hidden1),
            ("hidden2", self.hidden2),
        ] {
            if v == 0 {
                return Err(Error::invalid(field, "must be at least 1"));
            }
        }
        if self.output_dim != 1 {
            return Err(Error::invalid(
                "output_dim",
                "only a single regression output is supported",
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::invalid(
                "dropout_rate",
                format!("{} is outside [0, 1)", self.dropout_rate),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerCounts {
    pub lstm1: usize,
    pub lstm2: usize,
    pub dense: usize,
}

impl LayerCounts {
    pub fn total(&self) -> usize {
        self.lstm1 + self.lstm2 + self.dense
    }
}

fn lstm_param_count(input_dim: usize, hidden: usize) -> usize {
    4 * hidden * (input_dim + hidden + 1)
}

pub fn parameter_count(spec: &ModelSpec) -> LayerCounts {
    LayerCounts {
        lstm1: lstm_param_count(spec.input_dim, spec.hidden1),
        lstm2: lstm_param_count(spec.hidden1, spec.hidden2),
        dense: (spec.hidden2 + 1) * spec.output_dim,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lstm1: LstmCellParams,
    pub lstm2: LstmCellParams,
    pub dense: DenseParams,
}

impl ModelParams {
    pub fn zeros(spec: &ModelSpec) -> Self {
        ModelParams {
            lstm1: LstmCellParams::zeros(spec.input_dim, spec.hidden1),
            lstm2: LstmCellParams::zeros(spec.hidden1, spec.hidden2),
            dense: DenseParams::zeros(spec.hidden2, spec.output_dim),
        }
    }

    pub fn counts(&self) -> LayerCounts {
        LayerCounts {
            lstm1: self.lstm1.num_values(),
            lstm2: self.lstm2.num_values(),
            dense: self.dense.num_values(),
        }
    }

    /// Checks that every array has the shape `spec` implies.
    pub fn check_shapes(&self, spec: &ModelSpec) -> Result<()> {
        self.lstm1.validate()?;
        self.lstm2.validate()?;
        self.dense.validate()?;
        let expect = [
            ("lstm1", self.lstm1.input_dim(), spec.input_dim),
            ("lstm1 hidden", self.lstm1.hidden(), spec.hidden1),
            ("lstm2", self.lstm2.input_dim(), spec.hidden1),
            ("lstm2 hidden", self.lstm2.hidden(), spec.hidden2),
            ("dense", self.dense.w.cols(), spec.hidden2),
            ("dense out", self.dense.w.rows(), spec.output_dim),
        ];
        for (context, actual, expected) in expect {
            if actual != expected {
                return Err(Error::dim(context, expected, actual));
            }
        }
        Ok(())
    }
}

impl ParamSet for ModelParams {
    fn slices(&self) -> Vec<&[f64]> {
        let mut v = self.lstm1.slices();
        v.extend(self.lstm2.slices());
        v.extend(self.dense.slices());
        v
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = self.lstm1.slices_mut();
        v.extend(self.lstm2.slices_mut());
        v.extend(self.dense.slices_mut());
        v
    }
}

/// Intermediates of one forward pass through the stack.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCache {
    pub lstm1: Vec<LstmCellCache>,
    pub mask1: Vec<Vec<f64>>,
    pub lstm2: Vec<LstmCellCache>,
    pub mask2: Vec<f64>,
    pub dense: DenseCache,
}

/// Runs one window through the network. Both LSTM layers start from a zero
/// state; the first returns its full sequence, the second only its final
/// hidden state.
pub fn model_forward(
    spec: &ModelSpec,
    params: &ModelParams,
    window: &[f64],
    mode: &mut Mode<'_>,
) -> Result<(f64, ModelCache)> {
    if window.len() != spec.window_len() {
        return Err(Error::dim("model window", spec.window_len(), window.len()));
    }

    let mut state1 = LstmCellState::zeros(spec.hidden1);
    let mut state2 = LstmCellState::zeros(spec.hidden2);
    let mut lstm1 = Vec::with_capacity(spec.timesteps);
    let mut lstm2 = Vec::with_capacity(spec.timesteps);
    let mut mask1 = Vec::with_capacity(spec.timesteps);

    for x in window.chunks(spec.input_dim) {
        let (next1, cache1) = lstm_cell_forward(&params.lstm1, x, &state1)?;
        let (dropped, mask) = dropout_forward(spec.dropout_rate, &next1.h, mode)?;
        let (next2, cache2) = lstm_cell_forward(&params.lstm2, &dropped, &state2)?;
        state1 = next1;
        state2 = next2;
        lstm1.push(cache1);
        lstm2.push(cache2);
        mask1.push(mask);
    }

    let (dropped, mask2) = dropout_forward(spec.dropout_rate, &state2.h, mode)?;
    let (y, dense) = dense_forward(&params.dense, &dropped)?;
    let cache = ModelCache {
        lstm1,
        mask1,
        lstm2,
        mask2,
        dense,
    };
    Ok((y[0], cache))
}

/// Backpropagates `grad_pred = ∂L/∂prediction` through the cached pass,
/// adding parameter gradients into `grads`. Returns `∂L/∂window`.
pub fn model_backward(
    spec: &ModelSpec,
    params: &ModelParams,
    cache: &ModelCache,
    grad_pred: f64,
    grads: &mut ModelParams,
) -> Result<Vec<f64>> {
    let steps = cache.lstm1.len();
    if steps != spec.timesteps || cache.lstm2.len() != steps || cache.mask1.len() != steps {
        return Err(Error::dim("model cache timesteps", spec.timesteps, steps));
    }

    let grad_dense_in = dense_backward(&params.dense, &cache.dense, &[grad_pred], &mut grads.dense)?;
    let mut grad_h2 = dropout_backward(&cache.mask2, &grad_dense_in);
    let mut grad_c2 = vec![0.0; spec.hidden2];

    // Layer-2 BPTT; collect the gradient reaching each layer-1 output.
    let mut grad_h1_out = vec![Vec::new(); steps];
    for t in (0..steps).rev() {
        let (gx, gprev) = lstm_cell_backward(&params.lstm2, &cache.lstm2[t], &grad_h2, &grad_c2, &mut grads.lstm2)?;
        grad_h1_out[t] = dropout_backward(&cache.mask1[t], &gx);
        grad_h2 = gprev.h;
        grad_c2 = gprev.c;
    }

    let mut grad_window = vec![0.0; spec.window_len()];
    let mut carry_h = vec![0.0; spec.hidden1];
    let mut carry_c = vec![0.0; spec.hidden1];
    for t in (0..steps).rev() {
        let grad_h: Vec<f64> = grad_h1_out[t].iter().zip(&carry_h).map(|(a, b)| a + b).collect();
        let (gx, gprev) = lstm_cell_backward(&params.lstm1, &cache.lstm1[t], &grad_h, &carry_c, &mut grads.lstm1)?;
        grad_window[t * spec.input_dim..(t + 1) * spec.input_dim].copy_from_slice(&gx);
        carry_h = gprev.h;
        carry_c = gprev.c;
    }
    Ok(grad_window)
}
