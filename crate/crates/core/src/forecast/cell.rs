//! Recurrent cells and their parameters, implemented from scratch.
//!
//! Both cells map a scalar input and the previous hidden state to a new
//! hidden state; a shared linear head turns the final hidden state into the
//! scalar prediction. Hidden activation is tanh, output activation is the
//! identity (the target is an unbounded concentration), and LSTM gates are
//! logistic.
//!
//! Parameters flatten to a single canonical order used everywhere (training
//! updates, gradient checking, model files):
//!
//! * RNN: `w_x (m), w_h (m*m row-major), b_h (m), w_y (m), b_y (1)`
//! * LSTM: per gate in order input, forget, candidate, output:
//!   `w_x (m), w_h (m*m row-major), b (m)`; then `w_y (m), b_y (1)`.

// Index-based loops keep the recurrence kernels close to their math.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Serialize, Serializer};
use std::fmt;

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Which recurrent cell a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Rnn,
    Lstm,
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellKind::Rnn => "rnn",
            CellKind::Lstm => "lstm",
        })
    }
}

impl std::str::FromStr for CellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rnn" => Ok(CellKind::Rnn),
            "lstm" => Ok(CellKind::Lstm),
            other => Err(Error::InvalidParameter(format!("unknown cell `{other}`"))),
        }
    }
}

impl Serialize for CellKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Vanilla RNN parameters with hidden size `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnParams {
    pub m: usize,
    /// Input-to-hidden weights, length m.
    pub w_x: Vec<f64>,
    /// Hidden-to-hidden weights, m x m row-major.
    pub w_h: Vec<f64>,
    pub b_h: Vec<f64>,
    /// Hidden-to-output weights, length m.
    pub w_y: Vec<f64>,
    pub b_y: f64,
}

impl RnnParams {
    pub fn zeros(m: usize) -> Self {
        RnnParams {
            m,
            w_x: vec![0.0; m],
            w_h: vec![0.0; m * m],
            b_h: vec![0.0; m],
            w_y: vec![0.0; m],
            b_y: 0.0,
        }
    }

    pub fn flat_len(m: usize) -> usize {
        m * m + 3 * m + 1
    }

    pub(crate) fn flat_iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w_x
            .iter_mut()
            .chain(self.w_h.iter_mut())
            .chain(self.b_h.iter_mut())
            .chain(self.w_y.iter_mut())
            .chain(std::iter::once(&mut self.b_y))
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(Self::flat_len(self.m));
        flat.extend_from_slice(&self.w_x);
        flat.extend_from_slice(&self.w_h);
        flat.extend_from_slice(&self.b_h);
        flat.extend_from_slice(&self.w_y);
        flat.push(self.b_y);
        flat
    }

    pub fn from_flat(m: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != Self::flat_len(m) {
            return Err(Error::InvalidParameter(format!(
                "expected {} parameters for rnn with hidden size {m}, got {}",
                Self::flat_len(m),
                flat.len()
            )));
        }
        let mut params = RnnParams::zeros(m);
        for (slot, v) in params.flat_iter_mut().zip(flat) {
            *slot = *v;
        }
        Ok(params)
    }
}

/// One LSTM gate: input weights, recurrent weights, bias.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    pub w_x: Vec<f64>,
    /// m x m row-major.
    pub w_h: Vec<f64>,
    pub b: Vec<f64>,
}

impl GateParams {
    fn zeros(m: usize) -> Self {
        GateParams {
            w_x: vec![0.0; m],
            w_h: vec![0.0; m * m],
            b: vec![0.0; m],
        }
    }

    fn flat_iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w_x
            .iter_mut()
            .chain(self.w_h.iter_mut())
            .chain(self.b.iter_mut())
    }
}

/// Standard four-gate LSTM parameters with hidden size `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub m: usize,
    pub input_gate: GateParams,
    pub forget_gate: GateParams,
    /// Cell-candidate (tanh) gate.
    pub candidate: GateParams,
    pub output_gate: GateParams,
    pub w_y: Vec<f64>,
    pub b_y: f64,
}

impl LstmParams {
    pub fn zeros(m: usize) -> Self {
        LstmParams {
            m,
            input_gate: GateParams::zeros(m),
            forget_gate: GateParams::zeros(m),
            candidate: GateParams::zeros(m),
            output_gate: GateParams::zeros(m),
            w_y: vec![0.0; m],
            b_y: 0.0,
        }
    }

    pub fn flat_len(m: usize) -> usize {
        4 * (m * m + 2 * m) + m + 1
    }

    pub(crate) fn flat_iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.input_gate
            .flat_iter_mut()
            .chain(self.forget_gate.flat_iter_mut())
            .chain(self.candidate.flat_iter_mut())
            .chain(self.output_gate.flat_iter_mut())
            .chain(self.w_y.iter_mut())
            .chain(std::iter::once(&mut self.b_y))
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(Self::flat_len(self.m));
        for gate in [
            &self.input_gate,
            &self.forget_gate,
            &self.candidate,
            &self.output_gate,
        ] {
            flat.extend_from_slice(&gate.w_x);
            flat.extend_from_slice(&gate.w_h);
            flat.extend_from_slice(&gate.b);
        }
        flat.extend_from_slice(&self.w_y);
        flat.push(self.b_y);
        flat
    }

    pub fn from_flat(m: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != Self::flat_len(m) {
            return Err(Error::InvalidParameter(format!(
                "expected {} parameters for lstm with hidden size {m}, got {}",
                Self::flat_len(m),
                flat.len()
            )));
        }
        let mut params = LstmParams::zeros(m);
        for (slot, v) in params.flat_iter_mut().zip(flat) {
            *slot = *v;
        }
        Ok(params)
    }
}

/// Parameters of either cell, plus the shared linear output head.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum CellParams {
    Rnn(RnnParams),
    Lstm(LstmParams),
}

impl CellParams {
    pub fn kind(&self) -> CellKind {
        match self {
            CellParams::Rnn(_) => CellKind::Rnn,
            CellParams::Lstm(_) => CellKind::Lstm,
        }
    }

    pub fn hidden(&self) -> usize {
        match self {
            CellParams::Rnn(p) => p.m,
            CellParams::Lstm(p) => p.m,
        }
    }

    pub fn zeros(kind: CellKind, m: usize) -> Self {
        match kind {
            CellKind::Rnn => CellParams::Rnn(RnnParams::zeros(m)),
            CellKind::Lstm => CellParams::Lstm(LstmParams::zeros(m)),
        }
    }

    /// Seeded initialization: weights uniform in ±1/sqrt(m), biases zero.
    /// Draws happen in canonical flat order, so a seed fully determines the
    /// starting point.
    pub fn init<R: Rng>(kind: CellKind, m: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (m as f64).sqrt();
        let mut params = CellParams::zeros(kind, m);
        match &mut params {
            CellParams::Rnn(p) => {
                fill_uniform(&mut p.w_x, bound, rng);
                fill_uniform(&mut p.w_h, bound, rng);
                fill_uniform(&mut p.w_y, bound, rng);
            }
            CellParams::Lstm(p) => {
                for gate in [
                    &mut p.input_gate,
                    &mut p.forget_gate,
                    &mut p.candidate,
                    &mut p.output_gate,
                ] {
                    fill_uniform(&mut gate.w_x, bound, rng);
                    fill_uniform(&mut gate.w_h, bound, rng);
                }
                fill_uniform(&mut p.w_y, bound, rng);
            }
        }
        params
    }

    pub fn flat_len(&self) -> usize {
        match self {
            CellParams::Rnn(p) => RnnParams::flat_len(p.m),
            CellParams::Lstm(p) => LstmParams::flat_len(p.m),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        match self {
            CellParams::Rnn(p) => p.to_flat(),
            CellParams::Lstm(p) => p.to_flat(),
        }
    }

    pub fn from_flat(kind: CellKind, m: usize, flat: &[f64]) -> Result<Self> {
        match kind {
            CellKind::Rnn => RnnParams::from_flat(m, flat).map(CellParams::Rnn),
            CellKind::Lstm => LstmParams::from_flat(m, flat).map(CellParams::Lstm),
        }
    }

    pub(crate) fn flat_iter_mut(&mut self) -> Box<dyn Iterator<Item = &mut f64> + '_> {
        match self {
            CellParams::Rnn(p) => Box::new(p.flat_iter_mut()),
            CellParams::Lstm(p) => Box::new(p.flat_iter_mut()),
        }
    }
}

fn fill_uniform<R: Rng>(slice: &mut [f64], bound: f64, rng: &mut R) {
    for v in slice.iter_mut() {
        *v = rng.gen_range(-bound..=bound);
    }
}

/// One vanilla RNN step: `h = tanh(w_x*x + W_h*h_prev + b_h)`, `y = w_y.h + b_y`.
pub fn rnn_cell(x: f64, h_prev: &[f64], p: &RnnParams) -> (Vec<f64>, f64) {
    debug_assert_eq!(h_prev.len(), p.m);
    let mut h = vec![0.0; p.m];
    for i in 0..p.m {
        let mut a = p.w_x[i] * x + p.b_h[i];
        let row = &p.w_h[i * p.m..(i + 1) * p.m];
        for (w, hp) in row.iter().zip(h_prev) {
            a += w * hp;
        }
        h[i] = a.tanh();
    }
    let y = output_head(&h, &p.w_y, p.b_y);
    (h, y)
}

pub(crate) fn output_head(h: &[f64], w_y: &[f64], b_y: f64) -> f64 {
    let mut y = b_y;
    for (w, hv) in w_y.iter().zip(h) {
        y += w * hv;
    }
    y
}

/// Per-step LSTM internals kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct LstmStep {
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

pub(crate) fn lstm_step(x: f64, h_prev: &[f64], c_prev: &[f64], p: &LstmParams) -> LstmStep {
    let m = p.m;
    debug_assert_eq!(h_prev.len(), m);
    debug_assert_eq!(c_prev.len(), m);
    let gate_pre = |gate: &GateParams, k: usize| {
        let mut a = gate.w_x[k] * x + gate.b[k];
        let row = &gate.w_h[k * m..(k + 1) * m];
        for (w, hp) in row.iter().zip(h_prev) {
            a += w * hp;
        }
        a
    };
    let mut step = LstmStep {
        i: vec![0.0; m],
        f: vec![0.0; m],
        g: vec![0.0; m],
        o: vec![0.0; m],
        c: vec![0.0; m],
        tanh_c: vec![0.0; m],
        h: vec![0.0; m],
    };
    for k in 0..m {
        step.i[k] = sigmoid(gate_pre(&p.input_gate, k));
        step.f[k] = sigmoid(gate_pre(&p.forget_gate, k));
        step.g[k] = gate_pre(&p.candidate, k).tanh();
        step.o[k] = sigmoid(gate_pre(&p.output_gate, k));
        step.c[k] = step.f[k] * c_prev[k] + step.i[k] * step.g[k];
        step.tanh_c[k] = step.c[k].tanh();
        step.h[k] = step.o[k] * step.tanh_c[k];
    }
    step
}

/// One LSTM step with the standard gated recurrence:
/// `c = f ⊙ c_prev + i ⊙ g`, `h = o ⊙ tanh(c)` with logistic gates `i`, `f`,
/// `o` and tanh candidate `g`.
pub fn lstm_cell(x: f64, h_prev: &[f64], c_prev: &[f64], p: &LstmParams) -> (Vec<f64>, Vec<f64>) {
    let step = lstm_step(x, h_prev, c_prev, p);
    (step.h, step.c)
}
