//! Mini-batch gradient-descent training with adaptive moments.

use super::bptt::batch_loss_and_grads;
use super::cell::CellParams;
use super::window::WindowDataset;
use super::TrainConfig;
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Adam optimizer state over the flattened parameter vector.
pub(crate) struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step<'a>(&mut self, params: impl Iterator<Item = &'a mut f64>, grads: &[f64], lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (k, p) in params.enumerate() {
            let g = grads[k];
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Scale the gradient so its global L2 norm never exceeds `max_norm`.
pub(crate) fn clip_global_norm(grads: &mut [f64], max_norm: f64) {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        for g in grads.iter_mut() {
            *g *= scale;
        }
    }
}

/// Train a cell on a scaled window dataset, minimizing mean squared error.
///
/// Initialization and per-epoch batch shuffling are driven solely by the
/// config seed, so identical (seed, data, config) produce a bit-identical
/// loss history and model. Returns the trained parameters and the per-epoch
/// mean training loss (in scaled space).
pub fn train(ds: &WindowDataset, cfg: &TrainConfig) -> Result<(CellParams, Vec<f64>)> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = CellParams::init(cfg.cell, cfg.hidden, &mut rng);
    let mut adam = Adam::new(params.flat_len());

    let n = ds.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_sq_err = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let (loss, grads) = batch_loss_and_grads(&params, ds, batch);
            epoch_sq_err += loss * batch.len() as f64;
            let mut flat = grads.to_flat();
            clip_global_norm(&mut flat, cfg.clip_norm);
            adam.step(params.flat_iter_mut(), &flat, cfg.learning_rate);
        }
        let epoch_loss = epoch_sq_err / n as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        losses.push(epoch_loss);
    }
    Ok((params, losses))
}
