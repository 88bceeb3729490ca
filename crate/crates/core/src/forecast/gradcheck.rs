//! Finite-difference verification of the backpropagation implementation.

use super::bptt::{batch_loss, batch_loss_and_grads};
use super::cell::CellParams;
use super::window::WindowDataset;

/// Central-difference gradient of the batch loss with respect to every
/// parameter, in canonical flat order.
pub fn numeric_gradient(params: &CellParams, ds: &WindowDataset, epsilon: f64) -> Vec<f64> {
    let positions: Vec<usize> = (0..ds.len()).collect();
    let n = params.flat_len();
    let mut grad = Vec::with_capacity(n);
    for k in 0..n {
        let mut plus = params.clone();
        *plus.flat_iter_mut().nth(k).unwrap() += epsilon;
        let mut minus = params.clone();
        *minus.flat_iter_mut().nth(k).unwrap() -= epsilon;
        let lp = batch_loss(&plus, ds, &positions);
        let lm = batch_loss(&minus, ds, &positions);
        grad.push((lp - lm) / (2.0 * epsilon));
    }
    grad
}

/// Worst per-parameter discrepancy between two gradients.
///
/// Relative where the gradients have meaningful magnitude; absolute below
/// 1e-6, where the relative ratio would only amplify finite-difference noise.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| {
            let scale = a.abs().max(n.abs());
            let diff = (a - n).abs();
            if scale < 1e-6 {
                diff
            } else {
                diff / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Compare every analytic partial derivative of the batch loss against
/// central finite differences; returns the worst relative error.
pub fn grad_check(params: &CellParams, ds: &WindowDataset, epsilon: f64) -> f64 {
    let positions: Vec<usize> = (0..ds.len()).collect();
    let (_, analytic) = batch_loss_and_grads(params, ds, &positions);
    let numeric = numeric_gradient(params, ds, epsilon);
    max_rel_error(&analytic.to_flat(), &numeric)
}
