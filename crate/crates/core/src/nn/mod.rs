//! Minimal dense numeric kernel: matrices, activations, parameter storage,
//! SGD, a seeded portable RNG, and a finite-difference gradient checker.

mod activations;
mod gradcheck;
mod param;
mod rng;

pub use activations::{identity, logistic, softmax, softmax_inplace};
pub use gradcheck::{grad_check, Differentiable, GradCheckReport};
pub use param::{global_grad_norm, scale_grads, sgd_step, Parameter};
pub use rng::RngState;

use crate::error::{Error, Result};

/// Dense row-major matrix of 64-bit floats. Column vectors are `(n, 1)` matrices.
pub type Matrix = ndarray::Array2<f64>;

/// Column vector `(n, 1)` from a slice.
pub fn col(values: &[f64]) -> Matrix {
    Matrix::from_shape_vec((values.len(), 1), values.to_vec()).expect("column shape")
}

/// Zero column vector `(n, 1)`.
pub fn zeros_col(n: usize) -> Matrix {
    Matrix::zeros((n, 1))
}

/// Matrix with every entry drawn uniformly from `[lo, hi)`, filled in
/// row-major order. Deterministic for a given RNG state.
pub fn uniform_init(rows: usize, cols: usize, lo: f64, hi: f64, rng: &mut RngState) -> Result<Matrix> {
    if lo >= hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    let mut m = Matrix::zeros((rows, cols));
    for v in m.iter_mut() {
        *v = rng.uniform(lo, hi);
    }
    Ok(m)
}
