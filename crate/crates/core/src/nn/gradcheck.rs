//! Central finite-difference gradient verification.

use super::param::Parameter;

/// An objective whose analytic gradients can be checked numerically.
///
/// `params` must return the same parameters in the same order on every call;
/// `loss` must be a deterministic function of the current parameter values.
pub trait Differentiable {
    /// Mutable access to every parameter, in a stable order.
    fn params(&mut self) -> Vec<&mut Parameter>;

    /// Loss at the current parameter values, without touching gradients.
    fn loss(&self) -> f64;

    /// Loss at the current parameter values, with gradients freshly
    /// accumulated into each parameter's `grad`.
    fn loss_and_grad(&mut self) -> f64;
}

/// Result of a [`grad_check`] run.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Max over all scalar parameters of `|a - n| / max(1e-8, |a| + |n|)`.
    pub max_rel_err: f64,
    pub worst_param: String,
    /// Flat (row-major) index of the worst scalar inside `worst_param`.
    pub worst_index: usize,
    pub scalars_checked: usize,
}

impl std::fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "max_rel_err={:.3e} worst={}[{}] scalars={}",
            self.max_rel_err, self.worst_param, self.worst_index, self.scalars_checked
        )
    }
}

/// Compare analytic gradients against central finite differences
/// `(L(θ+eps) - L(θ-eps)) / (2·eps)` for every scalar parameter.
///
/// `eps` should sit in `[1e-6, 1e-3]`; the relative error uses the
/// denominator `max(1e-8, |a| + |n|)` so exact zero gradients compare clean.
pub fn grad_check<D: Differentiable + ?Sized>(obj: &mut D, eps: f64) -> GradCheckReport {
    obj.loss_and_grad();
    let analytic: Vec<(String, Vec<f64>)> = obj
        .params()
        .iter()
        .map(|p| (p.name.clone(), p.grad.iter().cloned().collect()))
        .collect();
    for p in obj.params() {
        p.zero_grad();
    }

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        scalars_checked: 0,
    };

    let n_params = analytic.len();
    for pi in 0..n_params {
        let n_scalars = analytic[pi].1.len();
        for si in 0..n_scalars {
            let orig = {
                let mut ps = obj.params();
                let v = ps[pi].value.as_slice_mut().expect("contiguous parameter");
                let orig = v[si];
                v[si] = orig + eps;
                orig
            };
            let loss_plus = obj.loss();
            {
                let mut ps = obj.params();
                ps[pi].value.as_slice_mut().expect("contiguous parameter")[si] = orig - eps;
            }
            let loss_minus = obj.loss();
            {
                let mut ps = obj.params();
                ps[pi].value.as_slice_mut().expect("contiguous parameter")[si] = orig;
            }

            let numeric = (loss_plus - loss_minus) / (2.0 * eps);
            let a = analytic[pi].1[si];
            let rel = (a - numeric).abs() / f64::max(1e-8, a.abs() + numeric.abs());
            report.scalars_checked += 1;
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst_param = analytic[pi].0.clone();
                report.worst_index = si;
            }
        }
    }
    report
}
