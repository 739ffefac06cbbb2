use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::ParamSet;
use crate::error::{Error, Result};

/// Linear layer `y = W·x + b`, no activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl DenseParams {
    pub fn zeros(input_dim: usize, output_dim: usize) -> Self {
        DenseParams {
            w: Matrix::zeros(output_dim, input_dim),
            b: vec![0.0; output_dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.b.len() != self.w.rows() {
            return Err(Error::dim("dense bias", self.w.rows(), self.b.len()));
        }
        Ok(())
    }
}

impl ParamSet for DenseParams {
    fn slices(&self) -> Vec<&[f64]> {
        vec![self.w.as_slice(), &self.b]
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.w.as_mut_slice(), &mut self.b]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseCache {
    pub x: Vec<f64>,
}

pub fn dense_forward(params: &DenseParams, x: &[f64]) -> Result<(Vec<f64>, DenseCache)> {
    if x.len() != params.w.cols() {
        return Err(Error::dim("dense input", params.w.cols(), x.len()));
    }
    Ok((params.w.affine(x, &params.b), DenseCache { x: x.to_vec() }))
}

/// Adds parameter gradients into `param_grads` and returns `∂L/∂x`.
pub fn dense_backward(
    params: &DenseParams,
    cache: &DenseCache,
    grad_y: &[f64],
    param_grads: &mut DenseParams,
) -> Result<Vec<f64>> {
    if grad_y.len() != params.w.rows() {
        return Err(Error::dim("dense gradient", params.w.rows(), grad_y.len()));
    }
    param_grads.w.add_outer(grad_y, &cache.x);
    for (b, g) in param_grads.b.iter_mut().zip(grad_y) {
        *b += g;
    }
    let mut grad_x = vec![0.0; params.w.cols()];
    params.w.add_transpose_mul(grad_y, &mut grad_x);
    Ok(grad_x)
}
