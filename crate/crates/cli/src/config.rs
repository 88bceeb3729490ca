//! One TOML config file drives every command; global flags override its
//! keys. See the repository README for the documented schema.

use crate::CliError;
use aq_core::analytics::AggConfig;
use aq_core::correction::{CorrectionParams, DiameterMethod};
use aq_core::forecast::TrainConfig;
use aq_core::ingest::QcConfig;
use aq_core::synth::SiteProfile;
use aq_core::timeseries::Timestamp;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
    #[serde(default)]
    pub correction: CorrectionSection,
    #[serde(default)]
    pub qc: QcSection,
    #[serde(default)]
    pub aggregation: AggSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub sites: Vec<SiteSection>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectionSection {
    #[serde(default = "default_cf")]
    pub cf: f64,
    #[serde(default = "default_density")]
    pub density: f64,
    /// "geometric" or "midpoint".
    #[serde(default = "default_diameter")]
    pub diameter: String,
    /// Three [lower, upper] bounds in µm.
    #[serde(default = "default_bins")]
    pub bins: [[f64; 2]; 3],
}

fn default_cf() -> f64 {
    3.0
}
fn default_density() -> f64 {
    1.0
}
fn default_diameter() -> String {
    "geometric".into()
}
fn default_bins() -> [[f64; 2]; 3] {
    [[0.3, 0.5], [0.5, 1.0], [1.0, 2.5]]
}

impl Default for CorrectionSection {
    fn default() -> Self {
        CorrectionSection {
            cf: default_cf(),
            density: default_density(),
            diameter: default_diameter(),
            bins: default_bins(),
        }
    }
}

impl CorrectionSection {
    pub fn to_params(&self) -> Result<CorrectionParams, CliError> {
        let method: DiameterMethod = self
            .diameter
            .parse()
            .map_err(|e| CliError::Usage(format!("correction.diameter: {e}")))?;
        let bounds = [
            (self.bins[0][0], self.bins[0][1]),
            (self.bins[1][0], self.bins[1][1]),
            (self.bins[2][0], self.bins[2][1]),
        ];
        CorrectionParams::new(self.cf, self.density, bounds, method)
            .map_err(|e| CliError::Usage(format!("correction: {e}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QcSection {
    #[serde(default = "default_max_pm25")]
    pub max_pm25: f64,
    #[serde(default = "default_max_count")]
    pub max_count: f64,
    #[serde(default = "default_true")]
    pub require_monotone_counts: bool,
    #[serde(default = "default_offset")]
    pub local_utc_offset_hours: i32,
}

fn default_max_pm25() -> f64 {
    1000.0
}
fn default_max_count() -> f64 {
    1.0e6
}
fn default_true() -> bool {
    true
}
fn default_offset() -> i32 {
    2
}

impl Default for QcSection {
    fn default() -> Self {
        QcSection {
            max_pm25: default_max_pm25(),
            max_count: default_max_count(),
            require_monotone_counts: true,
            local_utc_offset_hours: default_offset(),
        }
    }
}

impl QcSection {
    pub fn to_config(&self) -> QcConfig {
        QcConfig {
            max_pm25: self.max_pm25,
            max_count: self.max_count,
            require_monotone_counts: self.require_monotone_counts,
            local_utc_offset_hours: self.local_utc_offset_hours,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggSection {
    #[serde(default = "default_completeness")]
    pub hour_completeness: f64,
    #[serde(default = "default_completeness")]
    pub day_completeness: f64,
    /// "sample" or "population".
    #[serde(default = "default_std_kind")]
    pub std_kind: String,
    #[serde(default = "default_offset")]
    pub local_utc_offset_hours: i32,
    /// 24-hour guideline for the exceedance report, µg/m³.
    #[serde(default = "default_guideline")]
    pub guideline: f64,
}

fn default_completeness() -> f64 {
    0.75
}
fn default_std_kind() -> String {
    "sample".into()
}
fn default_guideline() -> f64 {
    25.0
}

impl Default for AggSection {
    fn default() -> Self {
        AggSection {
            hour_completeness: default_completeness(),
            day_completeness: default_completeness(),
            std_kind: default_std_kind(),
            local_utc_offset_hours: default_offset(),
            guideline: default_guideline(),
        }
    }
}

impl AggSection {
    pub fn to_config(&self) -> Result<AggConfig, CliError> {
        let cfg = AggConfig {
            hour_completeness: self.hour_completeness,
            day_completeness: self.day_completeness,
            std_kind: self
                .std_kind
                .parse()
                .map_err(|e| CliError::Usage(format!("aggregation.std_kind: {e}")))?,
            local_utc_offset_hours: self.local_utc_offset_hours,
        };
        cfg.validate()
            .map_err(|e| CliError::Usage(format!("aggregation: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    /// "lstm" or "rnn".
    #[serde(default = "default_cell")]
    pub cell: String,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_split")]
    pub split: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_clip")]
    pub clip_norm: f64,
}

fn default_cell() -> String {
    "lstm".into()
}
fn default_window() -> usize {
    24
}
fn default_hidden() -> usize {
    32
}
fn default_epochs() -> usize {
    50
}
fn default_batch() -> usize {
    32
}
fn default_lr() -> f64 {
    1e-3
}
fn default_split() -> f64 {
    0.8
}
fn default_seed() -> u64 {
    42
}
fn default_clip() -> f64 {
    5.0
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            cell: default_cell(),
            window: default_window(),
            hidden: default_hidden(),
            epochs: default_epochs(),
            batch_size: default_batch(),
            learning_rate: default_lr(),
            split: default_split(),
            seed: default_seed(),
            clip_norm: default_clip(),
        }
    }
}

impl TrainSection {
    pub fn to_config(&self, seed_override: Option<u64>) -> Result<TrainConfig, CliError> {
        let cfg = TrainConfig {
            cell: self
                .cell
                .parse()
                .map_err(|e| CliError::Usage(format!("train.cell: {e}")))?,
            window: self.window,
            horizon: 1,
            hidden: self.hidden,
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            split: self.split,
            seed: seed_override.unwrap_or(self.seed),
            clip_norm: self.clip_norm,
        };
        cfg.validate()
            .map_err(|e| CliError::Usage(format!("train: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteSection {
    pub label: String,
    /// Raw CSV path read by `ingest` (and written by `synth`).
    pub input: PathBuf,
    /// Optional schema file mapping logical fields to CSV header names.
    #[serde(default)]
    pub schema: Option<PathBuf>,
    #[serde(default)]
    pub synth: Option<SynthSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    #[serde(default = "default_base")]
    pub base_level: f64,
    #[serde(default = "default_morning")]
    pub morning_peak_hour: u32,
    #[serde(default = "default_evening")]
    pub evening_peak_hour: u32,
    #[serde(default = "default_amplitude")]
    pub peak_amplitude: f64,
    #[serde(default = "default_dry")]
    pub dry_multiplier: f64,
    #[serde(default = "default_noise")]
    pub noise_std: f64,
    #[serde(default = "default_synth_seed")]
    pub seed: u64,
    /// Local naive timestamps, e.g. "2022-08-01 00:00:00".
    pub start: String,
    pub end: String,
}

fn default_base() -> f64 {
    25.0
}
fn default_morning() -> u32 {
    7
}
fn default_evening() -> u32 {
    19
}
fn default_amplitude() -> f64 {
    15.0
}
fn default_dry() -> f64 {
    1.5
}
fn default_noise() -> f64 {
    5.0
}
fn default_synth_seed() -> u64 {
    1
}

impl SynthSection {
    pub fn to_profile(
        &self,
        seed_override: Option<u64>,
        offset_hours: i32,
    ) -> Result<(SiteProfile, Timestamp, Timestamp), CliError> {
        if self.morning_peak_hour > 23 || self.evening_peak_hour > 23 {
            return Err(CliError::Usage("synth peak hours must be 0..=23".into()));
        }
        let start = Timestamp::parse_local(&self.start, offset_hours)
            .map_err(|e| CliError::Usage(format!("synth.start: {e}")))?;
        let end = Timestamp::parse_local(&self.end, offset_hours)
            .map_err(|e| CliError::Usage(format!("synth.end: {e}")))?;
        if end <= start {
            return Err(CliError::Usage(format!(
                "synth range is empty: end {} <= start {}",
                self.end, self.start
            )));
        }
        Ok((
            SiteProfile {
                base_level: self.base_level,
                morning_peak_hour: self.morning_peak_hour,
                evening_peak_hour: self.evening_peak_hour,
                peak_amplitude: self.peak_amplitude,
                dry_multiplier: self.dry_multiplier,
                noise_std: self.noise_std,
                seed: seed_override.unwrap_or(self.seed),
                utc_offset_hours: offset_hours,
            },
            start,
            end,
        ))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config `{}`: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.sites.is_empty() {
            return Err(CliError::Usage("config declares no [[sites]]".into()));
        }
        let mut labels: Vec<&str> = self.sites.iter().map(|s| s.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != self.sites.len() {
            return Err(CliError::Usage("site labels must be unique".into()));
        }
        for site in &self.sites {
            if site.label.is_empty() {
                return Err(CliError::Usage("site label must be non-empty".into()));
            }
            if site.input.as_os_str().is_empty() {
                return Err(CliError::Usage(format!(
                    "site `{}` has an empty input path",
                    site.label
                )));
            }
        }
        Ok(())
    }

    /// Sites selected by an optional `--site` flag.
    pub fn select_sites(&self, site: Option<&str>) -> Result<Vec<&SiteSection>, CliError> {
        match site {
            None => Ok(self.sites.iter().collect()),
            Some(label) => {
                let found: Vec<&SiteSection> =
                    self.sites.iter().filter(|s| s.label == label).collect();
                if found.is_empty() {
                    return Err(CliError::Usage(format!("unknown site `{label}`")));
                }
                Ok(found)
            }
        }
    }
}
