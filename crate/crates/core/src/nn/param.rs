//! Trainable parameters and the per-example SGD update.

use super::Matrix;
use crate::error::{Error, Result};

/// A weight tensor paired with its gradient accumulator. The gradient always
/// has the value's shape and is zeroed by the optimizer step.
#[derive(Debug, Clone)]
pub struct Parameter {
    pub name: String,
    pub value: Matrix,
    pub grad: Matrix,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: Matrix) -> Self {
        let grad = Matrix::zeros(value.raw_dim());
        Parameter {
            name: name.into(),
            value,
            grad,
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }

    pub fn rows(&self) -> usize {
        self.value.nrows()
    }

    pub fn cols(&self) -> usize {
        self.value.ncols()
    }
}

/// `value <- value - lr * grad` for every parameter, then zero the grads.
///
/// Any non-finite gradient entry aborts the step before touching a value,
/// so a diverging run fails instead of training on garbage.
pub fn sgd_step<'a>(params: impl IntoIterator<Item = &'a mut Parameter>, lr: f64) -> Result<()> {
    let params: Vec<&'a mut Parameter> = params.into_iter().collect();
    for p in &params {
        if p.grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::GradientBlowup(p.name.clone()));
        }
    }
    for p in params {
        p.value.scaled_add(-lr, &p.grad);
        p.grad.fill(0.0);
    }
    Ok(())
}

/// L2 norm over all gradient entries of a parameter set.
pub fn global_grad_norm<'a>(params: impl IntoIterator<Item = &'a Parameter>) -> f64 {
    params
        .into_iter()
        .map(|p| p.grad.iter().map(|g| g * g).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

/// Multiply every gradient by `factor` (used by optional norm clipping).
pub fn scale_grads<'a>(params: impl IntoIterator<Item = &'a mut Parameter>, factor: f64) {
    for p in params {
        p.grad.mapv_inplace(|g| g * factor);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::col;

    #[test]
    fn sgd_step_arithmetic() {
        let mut p = Parameter::new("w", col(&[1.0]));
        p.grad[(0, 0)] = 0.5;
        sgd_step([&mut p], 0.1).unwrap();
        assert!((p.value[(0, 0)] - 0.95).abs() < 1e-15);
        assert_eq!(p.grad[(0, 0)], 0.0);
    }

    #[test]
    fn zero_grad_is_fixed_point() {
        let mut p = Parameter::new("w", col(&[2.0, -3.0]));
        sgd_step([&mut p], 0.1).unwrap();
        assert_eq!(p.value, col(&[2.0, -3.0]));
    }

    #[test]
    fn zero_lr_is_identity() {
        let mut p = Parameter::new("w", col(&[2.0]));
        p.grad[(0, 0)] = 123.0;
        sgd_step([&mut p], 0.0).unwrap();
        assert_eq!(p.value[(0, 0)], 2.0);
    }

    #[test]
    fn nan_grad_aborts_without_update() {
        let mut p = Parameter::new("w", col(&[1.0]));
        p.grad[(0, 0)] = f64::NAN;
        let err = sgd_step([&mut p], 0.1).unwrap_err();
        assert!(matches!(err, Error::GradientBlowup(ref n) if n == "w"));
        assert_eq!(p.value[(0, 0)], 1.0);
    }

    #[test]
    fn grad_norm_and_scaling() {
        let mut p = Parameter::new("w", col(&[0.0, 0.0]));
        p.grad[(0, 0)] = 3.0;
        p.grad[(1, 0)] = 4.0;
        assert!((global_grad_norm([&p]) - 5.0).abs() < 1e-12);
        scale_grads([&mut p], 0.5);
        assert_eq!(p.grad[(0, 0)], 1.5);
    }
}
