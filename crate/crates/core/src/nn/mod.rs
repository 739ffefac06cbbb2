//! Network building blocks and the stacked forecasting model.

mod activation;
mod dense;
mod dropout;
mod lstm;
mod matrix;
mod model;

pub use activation::{sigmoid, tanh_act};
pub use dense::{dense_backward, dense_forward, DenseCache, DenseParams};
pub use dropout::{dropout_backward, dropout_forward, Mode};
pub use lstm::{lstm_cell_backward, lstm_cell_forward, GateActivations, LstmCellCache, LstmCellParams, LstmCellState};
pub use matrix::Matrix;
pub use model::{model_backward, model_forward, parameter_count, LayerCounts, ModelCache, ModelParams, ModelSpec};

/// Anything whose trainable values can be walked as a fixed sequence of
/// contiguous slices. Two values of the same shape yield slices of matching
/// lengths in the same order.
pub trait ParamSet {
    fn slices(&self) -> Vec<&[f64]>;
    fn slices_mut(&mut self) -> Vec<&mut [f64]>;

    fn num_values(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    fn fill(&mut self, value: f64) {
        for s in self.slices_mut() {
            s.fill(value);
        }
    }

    /// Adds `other` elementwise; shapes must match.
    fn accumulate(&mut self, other: &Self) {
        for (dst, src) in self.slices_mut().into_iter().zip(other.slices()) {
            debug_assert_eq!(dst.len(), src.len());
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
}

impl ParamSet for Vec<f64> {
    fn slices(&self) -> Vec<&[f64]> {
        vec![self.as_slice()]
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.as_mut_slice()]
    }
}
