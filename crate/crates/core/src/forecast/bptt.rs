//! Backpropagation through time for the seq-to-one regression loss.
//!
//! Each window is unrolled for its full length from zeroed initial state; the
//! prediction is the output head applied to the final hidden state and the
//! loss is the mean over the batch of squared errors. The backward pass is
//! exact (verified against central finite differences by `grad_check`).

// Index-based loops keep the recurrence kernels close to their math.
#![allow(clippy::needless_range_loop)]

use super::cell::{lstm_step, output_head, rnn_cell, CellParams, LstmParams, LstmStep, RnnParams};
use super::window::WindowDataset;

/// Forward pass for one window, no caching.
pub fn predict_window(params: &CellParams, inputs: &[f64]) -> f64 {
    match params {
        CellParams::Rnn(p) => {
            let mut h = vec![0.0; p.m];
            let mut y = p.b_y;
            for x in inputs {
                let (hn, yn) = rnn_cell(*x, &h, p);
                h = hn;
                y = yn;
            }
            y
        }
        CellParams::Lstm(p) => {
            let mut h = vec![0.0; p.m];
            let mut c = vec![0.0; p.m];
            for x in inputs {
                let step = lstm_step(*x, &h, &c, p);
                h = step.h;
                c = step.c;
            }
            output_head(&h, &p.w_y, p.b_y)
        }
    }
}

/// Mean squared error of the batch, forward only.
pub fn batch_loss(params: &CellParams, ds: &WindowDataset, positions: &[usize]) -> f64 {
    let mut total = 0.0;
    for &w in positions {
        let e = predict_window(params, &ds.inputs[w]) - ds.targets[w];
        total += e * e;
    }
    total / positions.len() as f64
}

/// Mean squared error of the batch plus its gradient with respect to every
/// parameter, via full backpropagation through time.
pub fn batch_loss_and_grads(
    params: &CellParams,
    ds: &WindowDataset,
    positions: &[usize],
) -> (f64, CellParams) {
    let batch = positions.len() as f64;
    let mut total = 0.0;
    let mut grads = CellParams::zeros(params.kind(), params.hidden());
    for &w in positions {
        let inputs = &ds.inputs[w];
        let target = ds.targets[w];
        match (params, &mut grads) {
            (CellParams::Rnn(p), CellParams::Rnn(g)) => {
                total += rnn_window(p, g, inputs, target, batch);
            }
            (CellParams::Lstm(p), CellParams::Lstm(g)) => {
                total += lstm_window(p, g, inputs, target, batch);
            }
            _ => unreachable!("grads mirror the parameter kind"),
        }
    }
    (total / batch, grads)
}

/// Forward + backward for one RNN window; returns the squared error and
/// accumulates `d(loss)/d(param)` into `g` (the 1/batch factor is folded into
/// the output gradient).
fn rnn_window(p: &RnnParams, g: &mut RnnParams, inputs: &[f64], target: f64, batch: f64) -> f64 {
    let m = p.m;
    let steps = inputs.len();

    // Forward, caching every hidden state. hs[0] is the zero initial state.
    let mut hs: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    hs.push(vec![0.0; m]);
    let mut y = p.b_y;
    for (t, x) in inputs.iter().enumerate() {
        let (h, yt) = rnn_cell(*x, &hs[t], p);
        hs.push(h);
        y = yt;
    }
    let err = y - target;
    let dy = 2.0 * err / batch;

    // Output head.
    let h_last = &hs[steps];
    for k in 0..m {
        g.w_y[k] += dy * h_last[k];
    }
    g.b_y += dy;

    // Backward through time.
    let mut dh: Vec<f64> = p.w_y.iter().map(|w| w * dy).collect();
    let mut dh_prev = vec![0.0; m];
    for t in (1..=steps).rev() {
        let h = &hs[t];
        let h_prev = &hs[t - 1];
        let x = inputs[t - 1];
        dh_prev.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..m {
            let da = dh[k] * (1.0 - h[k] * h[k]);
            g.b_h[k] += da;
            g.w_x[k] += da * x;
            let g_row = &mut g.w_h[k * m..(k + 1) * m];
            let p_row = &p.w_h[k * m..(k + 1) * m];
            for j in 0..m {
                g_row[j] += da * h_prev[j];
                dh_prev[j] += p_row[j] * da;
            }
        }
        std::mem::swap(&mut dh, &mut dh_prev);
    }
    err * err
}

/// Forward + backward for one LSTM window.
fn lstm_window(p: &LstmParams, g: &mut LstmParams, inputs: &[f64], target: f64, batch: f64) -> f64 {
    let m = p.m;
    let steps = inputs.len();

    let mut trace: Vec<LstmStep> = Vec::with_capacity(steps);
    let zero = vec![0.0; m];
    for (t, x) in inputs.iter().enumerate() {
        let (h_prev, c_prev) = if t == 0 {
            (&zero, &zero)
        } else {
            (&trace[t - 1].h, &trace[t - 1].c)
        };
        trace.push(lstm_step(*x, h_prev, c_prev, p));
    }
    let h_last = &trace[steps - 1].h;
    let y = output_head(h_last, &p.w_y, p.b_y);
    let err = y - target;
    let dy = 2.0 * err / batch;

    for k in 0..m {
        g.w_y[k] += dy * h_last[k];
    }
    g.b_y += dy;

    let mut dh: Vec<f64> = p.w_y.iter().map(|w| w * dy).collect();
    let mut dc = vec![0.0; m];
    let mut dh_prev = vec![0.0; m];
    for t in (0..steps).rev() {
        let step = &trace[t];
        let x = inputs[t];
        let (h_prev, c_prev) = if t == 0 {
            (&zero, &zero)
        } else {
            (&trace[t - 1].h, &trace[t - 1].c)
        };
        dh_prev.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..m {
            let do_ = dh[k] * step.tanh_c[k];
            // Cell state receives gradient both from h at this step and from
            // the forget path of the step above.
            let dc_k = dc[k] + dh[k] * step.o[k] * (1.0 - step.tanh_c[k] * step.tanh_c[k]);
            let di = dc_k * step.g[k];
            let dg = dc_k * step.i[k];
            let df = dc_k * c_prev[k];

            // Pre-activation gradients through each gate's nonlinearity.
            let da_i = di * step.i[k] * (1.0 - step.i[k]);
            let da_f = df * step.f[k] * (1.0 - step.f[k]);
            let da_g = dg * (1.0 - step.g[k] * step.g[k]);
            let da_o = do_ * step.o[k] * (1.0 - step.o[k]);

            for (gate_g, gate_p, da) in [
                (&mut g.input_gate, &p.input_gate, da_i),
                (&mut g.forget_gate, &p.forget_gate, da_f),
                (&mut g.candidate, &p.candidate, da_g),
                (&mut g.output_gate, &p.output_gate, da_o),
            ] {
                gate_g.w_x[k] += da * x;
                gate_g.b[k] += da;
                let g_row = &mut gate_g.w_h[k * m..(k + 1) * m];
                let p_row = &gate_p.w_h[k * m..(k + 1) * m];
                for j in 0..m {
                    g_row[j] += da * h_prev[j];
                    dh_prev[j] += p_row[j] * da;
                }
            }
            dc[k] = dc_k * step.f[k];
        }
        std::mem::swap(&mut dh, &mut dh_prev);
    }
    err * err
}
