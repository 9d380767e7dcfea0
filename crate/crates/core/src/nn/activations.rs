//! Activation functions: identity on the input layer, logistic on the
//! hidden-layer gates, softmax on the output layer.

/// Logistic sigmoid, `1 / (1 + e^-x)`. Saturates cleanly at 0 and 1 for
/// large-magnitude inputs.
pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Identity activation.
pub fn identity(x: f64) -> f64 {
    x
}

/// Softmax over a slice, computed with max-subtraction so large logits do
/// not overflow.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let mut out = xs.to_vec();
    softmax_inplace(&mut out);
    out
}

/// In-place softmax; see [`softmax`].
pub fn softmax_inplace(xs: &mut [f64]) {
    if xs.is_empty() {
        return;
    }
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in xs.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in xs.iter_mut() {
        *x /= sum;
    }
}
