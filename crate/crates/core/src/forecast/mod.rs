//! From-scratch recurrent forecasting: sliding-window dataset, min-max
//! scaling, RNN/LSTM cells, training via backpropagation through time,
//! persistence-baselined evaluation, and finite-difference gradient checking.

mod bptt;
mod cell;
mod gradcheck;
mod metrics;
mod model_io;
mod train;
mod window;

pub use bptt::{batch_loss, batch_loss_and_grads, predict_window};
pub use cell::{lstm_cell, rnn_cell, CellKind, CellParams, GateParams, LstmParams, RnnParams};
pub use gradcheck::{grad_check, max_rel_error, numeric_gradient};
pub use metrics::{coefficient_of_determination, mae, r_squared, rmse};
pub use model_io::{load_model, model_from_str, model_to_string, save_model};
pub use train::train;
pub use window::{longest_contiguous_run, make_windows, Scaler, WindowDataset};

use crate::error::{Error, Result};
use crate::timeseries::{TimeSeries, Timestamp};
use serde::Serialize;

/// Training hyperparameters. All of them feed the deterministic training
/// contract: (seed, data, config) fully determine the model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub cell: CellKind,
    /// Input window length in steps (hours).
    pub window: usize,
    /// Forecast horizon in steps; only 1 is supported.
    pub horizon: usize,
    /// Hidden state size.
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Chronological train fraction in (0, 1).
    pub split: f64,
    pub seed: u64,
    /// Global-norm gradient clip.
    pub clip_norm: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            cell: CellKind::Lstm,
            window: 24,
            horizon: 1,
            hidden: 32,
            epochs: 50,
            batch_size: 32,
            learning_rate: 1e-3,
            split: 0.8,
            seed: 42,
            clip_norm: 5.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::InvalidParameter("window must be >= 1".into()));
        }
        if self.horizon != 1 {
            return Err(Error::UnsupportedHorizon(self.horizon));
        }
        for (name, v) in [
            ("hidden", self.hidden),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
        ] {
            if v < 1 {
                return Err(Error::InvalidParameter(format!("{name} must be >= 1")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(
                "learning_rate must be positive and finite".into(),
            ));
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::InvalidParameter("split must be in (0, 1)".into()));
        }
        if self.clip_norm <= 0.0 || self.clip_norm.is_nan() {
            return Err(Error::InvalidParameter("clip_norm must be positive".into()));
        }
        Ok(())
    }
}

/// A trained forecaster: cell weights, output weights, the scaler fitted on
/// the training split, and the exact configuration (including seed) that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastModel {
    pub params: CellParams,
    pub scaler: Scaler,
    pub config: TrainConfig,
}

impl ForecastModel {
    /// One-step-ahead prediction from the most recent `window` observations,
    /// in µg/m³.
    pub fn predict_next(&self, recent: &[f64]) -> Result<f64> {
        if recent.len() != self.config.window {
            return Err(Error::InvalidParameter(format!(
                "expected {} recent values, got {}",
                self.config.window,
                recent.len()
            )));
        }
        let scaled: Vec<f64> = recent.iter().map(|v| self.scaler.transform(*v)).collect();
        Ok(self.scaler.invert(predict_window(&self.params, &scaled)))
    }
}

/// Test-split accuracy, with the persistence baseline trained-skill must be
/// measured against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub rmse: f64,
    pub mae: f64,
    /// Squared Pearson correlation; `None` when undefined.
    pub r2: Option<f64>,
    /// 1 - SS_res/SS_tot, reported alongside since it also penalizes bias.
    pub r2_determination: Option<f64>,
    /// RMSE of predicting the previous observed value.
    pub baseline_rmse: f64,
    pub n_test: usize,
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "rmse,mae,r2,r2_determination,baseline_rmse,n_test\n{},{},{},{},{},{}\n",
            self.rmse,
            self.mae,
            opt(self.r2),
            opt(self.r2_determination),
            self.baseline_rmse,
            self.n_test
        )
    }
}

/// Assemble an evaluation report from observed/predicted/baseline triples
/// (all in µg/m³).
pub fn eval_report(observed: &[f64], predicted: &[f64], baseline: &[f64]) -> Result<EvalReport> {
    let n = observed.len();
    let (r2, r2_determination) = if n >= 2 {
        (
            r_squared(observed, predicted)?,
            coefficient_of_determination(observed, predicted)?,
        )
    } else {
        (None, None)
    };
    Ok(EvalReport {
        rmse: rmse(observed, predicted)?,
        mae: mae(observed, predicted)?,
        r2,
        r2_determination,
        baseline_rmse: rmse(observed, baseline)?,
        n_test: n,
    })
}

/// Evaluate trained parameters on a scaled test dataset.
///
/// Predictions are inverted back to µg/m³ before any metric is computed; the
/// persistence baseline (predict the previous observed value, i.e. the last
/// window input) is computed on the same targets.
pub fn evaluate(params: &CellParams, test: &WindowDataset, scaler: &Scaler) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let observed: Vec<f64> = test.targets.iter().map(|v| scaler.invert(*v)).collect();
    let predicted: Vec<f64> = test
        .inputs
        .iter()
        .map(|w| scaler.invert(predict_window(params, w)))
        .collect();
    let baseline: Vec<f64> = test
        .inputs
        .iter()
        .map(|w| scaler.invert(*w.last().expect("window is non-empty")))
        .collect();
    eval_report(&observed, &predicted, &baseline)
}

/// One predicted/observed pair from the test split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForecastPoint {
    pub time: Timestamp,
    pub observed: f64,
    pub predicted: f64,
}

/// Everything a forecasting run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastOutcome {
    pub model: ForecastModel,
    pub report: EvalReport,
    /// Per-epoch mean training loss in scaled space.
    pub train_losses: Vec<f64>,
    /// Test-split predictions for plotting against observations.
    pub test_points: Vec<ForecastPoint>,
}

impl ForecastOutcome {
    /// Plot-ready CSV with columns `time_utc,observed,predicted`.
    pub fn test_points_csv(&self) -> String {
        let mut out = String::from("time_utc,observed,predicted\n");
        for p in &self.test_points {
            out.push_str(&format!("{},{},{}\n", p.time, p.observed, p.predicted));
        }
        out
    }
}

/// Full forecasting pipeline on an hourly series.
///
/// The series is split chronologically at `cfg.split`; the scaler is fitted
/// on the training prefix only; windows are assigned to train/test by the
/// position of their target, so no test information leaks into training.
pub fn run_forecast(hourly: &TimeSeries, cfg: &TrainConfig) -> Result<ForecastOutcome> {
    cfg.validate()?;
    let n = hourly.len();
    let split_index = ((n as f64) * cfg.split).floor() as usize;
    let windows = make_windows(hourly, cfg.window, cfg.horizon)?;

    let train_positions: Vec<usize> = (0..windows.len())
        .filter(|i| windows.source_indices[*i] < split_index)
        .collect();
    let test_positions: Vec<usize> = (0..windows.len())
        .filter(|i| windows.source_indices[*i] >= split_index)
        .collect();
    if train_positions.is_empty() || test_positions.is_empty() {
        return Err(Error::InsufficientData {
            needed: cfg.window + 2,
            found: longest_contiguous_run(hourly),
        });
    }

    let scaler = Scaler::fit(&hourly.values()[..split_index])?;
    let train_ds = windows.subset(&train_positions).transform(&scaler);
    let test_ds = windows.subset(&test_positions).transform(&scaler);

    let (params, train_losses) = train(&train_ds, cfg)?;
    let report = evaluate(&params, &test_ds, &scaler)?;
    let test_points = test_ds
        .inputs
        .iter()
        .zip(&test_ds.targets)
        .zip(&test_ds.target_times)
        .map(|((w, target), time)| ForecastPoint {
            time: *time,
            observed: scaler.invert(*target),
            predicted: scaler.invert(predict_window(&params, w)),
        })
        .collect();
    Ok(ForecastOutcome {
        model: ForecastModel {
            params,
            scaler,
            config: cfg.clone(),
        },
        report,
        train_losses,
        test_points,
    })
}
