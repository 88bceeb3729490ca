//! Turns raw low-cost optical particle-counter records into corrected PM2.5
//! time series, reproduces hourly/daily/seasonal/cross-site analytics, and
//! forecasts hourly PM2.5 with a from-scratch recurrent network.
//!
//! The pipeline, end to end:
//!
//! 1. [`ingest`] parses sensor CSVs, differences cumulative size-channel
//!    counts into per-bin counts, and applies quality-control filters.
//! 2. [`correction`] derives per-bin mass coefficients from first principles
//!    and computes the count-based PM2.5 estimate, plus a comparison harness
//!    against the vendor CF1 series.
//! 3. [`analytics`] resamples to hourly/daily means and produces diurnal,
//!    seasonal, annual, exceedance, and cross-site correlation summaries.
//! 4. [`forecast`] trains a vanilla RNN or LSTM one-step-ahead forecaster
//!    with backpropagation through time, and evaluates it against a
//!    persistence baseline.
//! 5. [`synth`] generates realistic synthetic sensor data for end-to-end
//!    testing.

pub mod analytics;
pub mod correction;
pub mod error;
pub mod forecast;
pub mod ingest;
pub mod synth;
pub mod timeseries;

pub use error::{Error, Result};
pub use timeseries::{align, season_of, AlignedPair, Resolution, Season, TimeSeries, Timestamp};
