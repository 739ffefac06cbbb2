use serde::{Deserialize, Serialize};

use super::activation::{sigmoid, tanh_act};
use super::matrix::Matrix;
use super::ParamSet;
use crate::error::{Error, Result};

/// Weights and biases of one LSTM cell.
///
/// Every gate matrix is `hidden × (hidden + input_dim)` and acts on the
/// concatenation `[h_prev, x]`, previous hidden state first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCellParams {
    pub w_input: Matrix,
    pub w_forget: Matrix,
    pub w_candidate: Matrix,
    pub w_output: Matrix,
    pub b_input: Vec<f64>,
    pub b_forget: Vec<f64>,
    pub b_candidate: Vec<f64>,
    pub b_output: Vec<f64>,
}

impl LstmCellParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        let w = || Matrix::zeros(hidden, hidden + input_dim);
        LstmCellParams {
            w_input: w(),
            w_forget: w(),
            w_candidate: w(),
            w_output: w(),
            b_input: vec![0.0; hidden],
            b_forget: vec![0.0; hidden],
            b_candidate: vec![0.0; hidden],
            b_output: vec![0.0; hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_input.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_input.cols() - self.hidden()
    }

    pub fn validate(&self) -> Result<()> {
        let shape = self.w_input.shape();
        for m in [&self.w_forget, &self.w_candidate, &self.w_output] {
            if m.shape() != shape {
                return Err(Error::invalid("lstm params", "gate matrices differ in shape"));
            }
        }
        if shape.1 < shape.0 {
            return Err(Error::invalid("lstm params", "matrix narrower than hidden size"));
        }
        for b in [&self.b_input, &self.b_forget, &self.b_candidate, &self.b_output] {
            if b.len() != shape.0 {
                return Err(Error::dim("lstm bias", shape.0, b.len()));
            }
        }
        Ok(())
    }

    /// Gate matrices in (input, forget, candidate, output) order.
    pub fn gate_matrices(&self) -> [&Matrix; 4] {
        [&self.w_input, &self.w_forget, &self.w_candidate, &self.w_output]
    }
}

impl ParamSet for LstmCellParams {
    fn slices(&self) -> Vec<&[f64]> {
        vec![
            self.w_input.as_slice(),
            self.w_forget.as_slice(),
            self.w_candidate.as_slice(),
            self.w_output.as_slice(),
            &self.b_input,
            &self.b_forget,
            &self.b_candidate,
            &self.b_output,
        ]
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_input.as_mut_slice(),
            self.w_forget.as_mut_slice(),
            self.w_candidate.as_mut_slice(),
            self.w_output.as_mut_slice(),
            &mut self.b_input,
            &mut self.b_forget,
            &mut self.b_candidate,
            &mut self.b_output,
        ]
    }
}

/// Hidden state `h` and cell memory `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmCellState {
    pub fn zeros(hidden: usize) -> Self {
        LstmCellState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateActivations {
    pub input: Vec<f64>,
    pub forget: Vec<f64>,
    pub candidate: Vec<f64>,
    pub output: Vec<f64>,
}

/// Everything the backward pass needs from one cell step.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellCache {
    /// `[h_prev, x]`.
    pub concat: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub gates: GateActivations,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

pub fn lstm_cell_forward(
    params: &LstmCellParams,
    x: &[f64],
    prev: &LstmCellState,
) -> Result<(LstmCellState, LstmCellCache)> {
    let hidden = params.hidden();
    let input_dim = params.input_dim();
    if x.len() != input_dim {
        return Err(Error::dim("lstm input", input_dim, x.len()));
    }
    if prev.h.len() != hidden || prev.c.len() != hidden {
        return Err(Error::dim("lstm state", hidden, prev.h.len().max(prev.c.len())));
    }

    let mut concat = Vec::with_capacity(hidden + input_dim);
    concat.extend_from_slice(&prev.h);
    concat.extend_from_slice(x);

    let gate = |w: &Matrix, b: &[f64], act: fn(f64) -> f64| -> Vec<f64> {
        w.affine(&concat, b).into_iter().map(act).collect()
    };
    let input = gate(&params.w_input, &params.b_input, sigmoid);
    let forget = gate(&params.w_forget, &params.b_forget, sigmoid);
    let candidate = gate(&params.w_candidate, &params.b_candidate, tanh_act);
    let output = gate(&params.w_output, &params.b_output, sigmoid);

    let c: Vec<f64> = (0..hidden)
        .map(|j| forget[j] * prev.c[j] + input[j] * candidate[j])
        .collect();
    let tanh_c: Vec<f64> = c.iter().map(|&v| tanh_act(v)).collect();
    let h: Vec<f64> = output.iter().zip(&tanh_c).map(|(o, t)| o * t).collect();

    let next = LstmCellState { h, c: c.clone() };
    let cache = LstmCellCache {
        concat,
        c_prev: prev.c.clone(),
        gates: GateActivations {
            input,
            forget,
            candidate,
            output,
        },
        c,
        tanh_c,
    };
    Ok((next, cache))
}

/// Reverse-mode step through one cell.
///
/// `grad_h` and `grad_c` are the loss gradients arriving at this step's
/// outputs. Parameter gradients are **added** into `param_grads`, which lets
/// callers accumulate over timesteps and samples. Returns the gradients with
/// respect to `x` and to the previous state.
pub fn lstm_cell_backward(
    params: &LstmCellParams,
    cache: &LstmCellCache,
    grad_h: &[f64],
    grad_c: &[f64],
    param_grads: &mut LstmCellParams,
) -> Result<(Vec<f64>, LstmCellState)> {
    let hidden = params.hidden();
    if grad_h.len() != hidden || grad_c.len() != hidden {
        return Err(Error::dim("lstm gradient", hidden, grad_h.len().max(grad_c.len())));
    }
    if cache.c.len() != hidden || cache.concat.len() != params.w_input.cols() {
        return Err(Error::dim("lstm cache", hidden, cache.c.len()));
    }
    let g = &cache.gates;

    let mut d_pre = [
        vec![0.0; hidden],
        vec![0.0; hidden],
        vec![0.0; hidden],
        vec![0.0; hidden],
    ];
    let mut grad_c_prev = vec![0.0; hidden];
    for j in 0..hidden {
        let t = cache.tanh_c[j];
        let d_out = grad_h[j] * t;
        let dc = grad_c[j] + grad_h[j] * g.output[j] * (1.0 - t * t);
        let d_in = dc * g.candidate[j];
        let d_forget = dc * cache.c_prev[j];
        let d_cand = dc * g.input[j];
        grad_c_prev[j] = dc * g.forget[j];

        d_pre[0][j] = d_in * g.input[j] * (1.0 - g.input[j]);
        d_pre[1][j] = d_forget * g.forget[j] * (1.0 - g.forget[j]);
        d_pre[2][j] = d_cand * (1.0 - g.candidate[j] * g.candidate[j]);
        d_pre[3][j] = d_out * g.output[j] * (1.0 - g.output[j]);
    }

    let mut d_concat = vec![0.0; cache.concat.len()];
    for (w, d) in params.gate_matrices().into_iter().zip(&d_pre) {
        w.add_transpose_mul(d, &mut d_concat);
    }

    param_grads.w_input.add_outer(&d_pre[0], &cache.concat);
    param_grads.w_forget.add_outer(&d_pre[1], &cache.concat);
    param_grads.w_candidate.add_outer(&d_pre[2], &cache.concat);
    param_grads.w_output.add_outer(&d_pre[3], &cache.concat);
    let biases = [
        &mut param_grads.b_input,
        &mut param_grads.b_forget,
        &mut param_grads.b_candidate,
        &mut param_grads.b_output,
    ];
    for (b, d) in biases.into_iter().zip(&d_pre) {
        for (bj, dj) in b.iter_mut().zip(d) {
            *bj += dj;
        }
    }

    let grad_x = d_concat.split_off(hidden);
    Ok((
        grad_x,
        LstmCellState {
            h: d_concat,
            c: grad_c_prev,
        },
    ))
}
