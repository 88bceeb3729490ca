//! Sliding-window supervised dataset and min-max scaling.

use crate::error::{Error, Result};
use crate::timeseries::{TimeSeries, Timestamp};

/// Supervised one-step-ahead windows: each input is `window_len` consecutive
/// values and the target is the value one step after them. Windows never
/// cross a gap in the series.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowDataset {
    pub window_len: usize,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    /// Timestamp of each target (one step after the last input).
    pub target_times: Vec<Timestamp>,
    /// Index of each target in the source series, for chronological splits.
    pub source_indices: Vec<usize>,
}

impl WindowDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Apply a fitted scaler to all inputs and targets.
    pub fn transform(&self, scaler: &Scaler) -> WindowDataset {
        WindowDataset {
            window_len: self.window_len,
            inputs: self
                .inputs
                .iter()
                .map(|w| w.iter().map(|v| scaler.transform(*v)).collect())
                .collect(),
            targets: self.targets.iter().map(|v| scaler.transform(*v)).collect(),
            target_times: self.target_times.clone(),
            source_indices: self.source_indices.clone(),
        }
    }

    /// Keep only the windows at the given positions.
    pub fn subset(&self, positions: &[usize]) -> WindowDataset {
        WindowDataset {
            window_len: self.window_len,
            inputs: positions.iter().map(|i| self.inputs[*i].clone()).collect(),
            targets: positions.iter().map(|i| self.targets[*i]).collect(),
            target_times: positions.iter().map(|i| self.target_times[*i]).collect(),
            source_indices: positions.iter().map(|i| self.source_indices[*i]).collect(),
        }
    }
}

/// Emit every maximal gap-free window of the series.
///
/// A window needs `window_len + 1` consecutive points (inputs plus target) at
/// exactly the series resolution; windows spanning a missing step are
/// skipped. A series without any contiguous run of that length yields an
/// empty dataset.
pub fn make_windows(
    series: &TimeSeries,
    window_len: usize,
    horizon: usize,
) -> Result<WindowDataset> {
    if window_len < 1 {
        return Err(Error::InvalidParameter(
            "window length must be at least 1".into(),
        ));
    }
    if horizon != 1 {
        return Err(Error::UnsupportedHorizon(horizon));
    }
    let step = series.resolution().seconds();
    let times = series.times();
    let values = series.values();
    let mut ds = WindowDataset {
        window_len,
        inputs: Vec::new(),
        targets: Vec::new(),
        target_times: Vec::new(),
        source_indices: Vec::new(),
    };
    let mut run = 1usize;
    for i in 1..times.len() {
        if times[i].unix_seconds() - times[i - 1].unix_seconds() == step {
            run += 1;
        } else {
            run = 1;
        }
        if run > window_len {
            ds.inputs.push(values[i - window_len..i].to_vec());
            ds.targets.push(values[i]);
            ds.target_times.push(times[i]);
            ds.source_indices.push(i);
        }
    }
    Ok(ds)
}

/// Length of the longest run of consecutive points at the series resolution.
pub fn longest_contiguous_run(series: &TimeSeries) -> usize {
    let step = series.resolution().seconds();
    let times = series.times();
    if times.is_empty() {
        return 0;
    }
    let mut best = 1usize;
    let mut run = 1usize;
    for i in 1..times.len() {
        if times[i].unix_seconds() - times[i - 1].unix_seconds() == step {
            run += 1;
        } else {
            run = 1;
        }
        best = best.max(run);
    }
    best
}

/// Min-max scaler fitted on training data only; maps `[min, max]` to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaler {
    pub min: f64,
    pub max: f64,
}

impl Scaler {
    pub fn fit(values: &[f64]) -> Result<Scaler> {
        if values.is_empty() {
            return Err(Error::ScalerFit("no training values".into()));
        }
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::ScalerFit("non-finite training values".into()));
        }
        if max == min {
            return Err(Error::ScalerFit(format!(
                "constant training data (min == max == {min})"
            )));
        }
        Ok(Scaler { min, max })
    }

    pub fn transform(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }

    pub fn invert(&self, u: f64) -> f64 {
        self.min + u * (self.max - self.min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::Resolution;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hour(n: i64) -> Timestamp {
        Timestamp::from_unix_seconds(n * 3_600)
    }

    fn hourly(hours: &[i64]) -> TimeSeries {
        TimeSeries::from_points(
            hours.iter().map(|h| (hour(*h), *h as f64)).collect(),
            Resolution::Hour,
            "ug/m3",
        )
        .0
    }

    #[test]
    fn contiguous_series_yields_n_minus_window_windows() {
        let hours: Vec<i64> = (0..26).collect();
        let ds = make_windows(&hourly(&hours), 24, 1).unwrap();
        assert_eq!(ds.len(), 2);

        let hours: Vec<i64> = (0..48).collect();
        let ds = make_windows(&hourly(&hours), 24, 1).unwrap();
        assert_eq!(ds.len(), 24);
    }

    #[test]
    fn gap_in_the_middle_breaks_windows() {
        // 25 points with one missing in the middle: no run of 25.
        let mut hours: Vec<i64> = (0..26).collect();
        hours.remove(12);
        let ds = make_windows(&hourly(&hours), 24, 1).unwrap();
        assert_eq!(ds.len(), 0);
    }

    #[test]
    fn window_target_follows_inputs() {
        let hours: Vec<i64> = (0..30).collect();
        let ds = make_windows(&hourly(&hours), 4, 1).unwrap();
        for (i, input) in ds.inputs.iter().enumerate() {
            assert_eq!(input.len(), 4);
            assert_eq!(*input.last().unwrap() + 1.0, ds.targets[i]);
            let last_input_time = hour(ds.targets[i] as i64 - 1);
            assert_eq!(ds.target_times[i], last_input_time.plus_seconds(3_600));
        }
    }

    #[test]
    fn short_series_yields_empty_dataset() {
        let hours: Vec<i64> = (0..24).collect();
        let ds = make_windows(&hourly(&hours), 24, 1).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn horizon_other_than_one_is_rejected() {
        assert!(matches!(
            make_windows(&hourly(&[0, 1, 2]), 1, 2),
            Err(Error::UnsupportedHorizon(2))
        ));
    }

    #[test]
    fn longest_run_tracks_gaps() {
        assert_eq!(longest_contiguous_run(&hourly(&[0, 1, 2, 5, 6])), 3);
        assert_eq!(longest_contiguous_run(&hourly(&[])), 0);
        assert_eq!(longest_contiguous_run(&hourly(&[7])), 1);
    }

    #[test]
    fn scaler_basic_mapping() {
        let s = Scaler::fit(&[0.0, 10.0]).unwrap();
        assert_eq!(s.transform(5.0), 0.5);
        assert_eq!(s.transform(20.0), 2.0); // out of range passes through the formula
        assert_eq!(s.invert(0.5), 5.0);
    }

    #[test]
    fn scaler_round_trip_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let lo: f64 = rng.gen_range(-100.0..100.0);
            let hi = lo + rng.gen_range(0.1..200.0);
            let s = Scaler::fit(&[lo, hi]).unwrap();
            for _ in 0..20 {
                let v = rng.gen_range(lo..hi);
                let round = s.invert(s.transform(v));
                assert!((round - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn scaler_rejects_constant_data() {
        assert!(matches!(
            Scaler::fit(&[4.0, 4.0, 4.0]),
            Err(Error::ScalerFit(_))
        ));
        assert!(Scaler::fit(&[]).is_err());
    }
}
