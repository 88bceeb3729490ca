//! Count-based PM2.5 estimation.
//!
//! Instead of trusting the vendor's proprietary mass conversion, PM2.5 is
//! rebuilt from the particle number counts in three size bins. Each bin gets
//! a mass-per-particle coefficient derived from first principles: a sphere of
//! water density at the bin's representative diameter. The estimate is then
//!
//! ```text
//! pm2.5 = cf * (a*x + b*y + c*z)      [µg/m³]
//! ```
//!
//! with `cf` a fixed calibration factor (default 3), `x`/`y`/`z` the
//! 0.3–0.5 / 0.5–1.0 / 1.0–2.5 µm bin counts in particles/dL, and `a`/`b`/`c`
//! the per-bin coefficients computed at startup, never hard-coded.

use crate::analytics::pearson_slices;
use crate::error::{Error, Result};
use crate::ingest::SizeBinCounts;
use crate::timeseries::{align, Resolution, TimeSeries, Timestamp};
use serde::Serialize;
use std::f64::consts::PI;

/// How to pick a bin's representative particle diameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiameterMethod {
    /// sqrt(lower * upper) — the default.
    #[default]
    GeometricMean,
    /// (lower + upper) / 2.
    Midpoint,
}

impl std::str::FromStr for DiameterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(DiameterMethod::GeometricMean),
            "midpoint" => Ok(DiameterMethod::Midpoint),
            other => Err(Error::InvalidParameter(format!(
                "unknown diameter method `{other}` (expected geometric or midpoint)"
            ))),
        }
    }
}

/// Mass coefficient for one size bin: µg/m³ contributed by one particle/dL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinCoefficient {
    pub lower_um: f64,
    pub upper_um: f64,
    /// Representative particle diameter, µm.
    pub d_um: f64,
    /// (µg/m³) per (particle/dL).
    pub coefficient: f64,
}

/// Derive the mass coefficient for a bin using the geometric-mean diameter.
pub fn bin_mass_coefficient(
    lower_um: f64,
    upper_um: f64,
    density_g_cm3: f64,
) -> Result<BinCoefficient> {
    bin_mass_coefficient_with(
        lower_um,
        upper_um,
        density_g_cm3,
        DiameterMethod::GeometricMean,
    )
}

/// Derive the mass coefficient for a bin.
///
/// The mass of one spherical particle of diameter `d` is `density * (4/3)πr³`
/// with `r = d/2`. Converting grams to micrograms (1e6) and particles/dL to
/// particles/m³ (1e4) gives the coefficient in (µg/m³) per (particle/dL).
pub fn bin_mass_coefficient_with(
    lower_um: f64,
    upper_um: f64,
    density_g_cm3: f64,
    method: DiameterMethod,
) -> Result<BinCoefficient> {
    if !(lower_um > 0.0 && upper_um > lower_um) {
        return Err(Error::InvalidBinBounds {
            lower: lower_um,
            upper: upper_um,
        });
    }
    if density_g_cm3 <= 0.0 || density_g_cm3.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "density must be positive, got {density_g_cm3}"
        )));
    }
    let d_um = match method {
        DiameterMethod::GeometricMean => (lower_um * upper_um).sqrt(),
        DiameterMethod::Midpoint => 0.5 * (lower_um + upper_um),
    };
    let r_cm = 0.5 * d_um * 1.0e-4;
    let volume_cm3 = (4.0 / 3.0) * PI * r_cm.powi(3);
    let coefficient = density_g_cm3 * volume_cm3 * 1.0e10;
    Ok(BinCoefficient {
        lower_um,
        upper_um,
        d_um,
        coefficient,
    })
}

/// Calibration factor, particle density, and the three bin coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionParams {
    /// Unitless calibration factor applied to the summed bin masses.
    pub cf: f64,
    pub density_g_cm3: f64,
    /// Ordered by lower bound: 0.3–0.5, 0.5–1.0, 1.0–2.5 µm by default.
    pub bins: [BinCoefficient; 3],
}

impl CorrectionParams {
    pub const DEFAULT_BOUNDS: [(f64, f64); 3] = [(0.3, 0.5), (0.5, 1.0), (1.0, 2.5)];

    pub fn new(
        cf: f64,
        density_g_cm3: f64,
        bounds: [(f64, f64); 3],
        method: DiameterMethod,
    ) -> Result<Self> {
        if cf <= 0.0 || cf.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "calibration factor must be positive, got {cf}"
            )));
        }
        let bins = [
            bin_mass_coefficient_with(bounds[0].0, bounds[0].1, density_g_cm3, method)?,
            bin_mass_coefficient_with(bounds[1].0, bounds[1].1, density_g_cm3, method)?,
            bin_mass_coefficient_with(bounds[2].0, bounds[2].1, density_g_cm3, method)?,
        ];
        if !(bins[0].lower_um < bins[1].lower_um && bins[1].lower_um < bins[2].lower_um) {
            return Err(Error::InvalidParameter(
                "bins must be ordered by lower bound".into(),
            ));
        }
        Ok(CorrectionParams {
            cf,
            density_g_cm3,
            bins,
        })
    }

    /// Build params from explicit per-bin coefficients (test oracles, mostly).
    pub fn with_coefficients(cf: f64, coefficients: [f64; 3]) -> Self {
        let mut params = CorrectionParams {
            cf,
            ..CorrectionParams::default()
        };
        for (bin, c) in params.bins.iter_mut().zip(coefficients) {
            bin.coefficient = c;
        }
        params
    }
}

impl Default for CorrectionParams {
    fn default() -> Self {
        CorrectionParams::new(
            3.0,
            1.0,
            Self::DEFAULT_BOUNDS,
            DiameterMethod::GeometricMean,
        )
        .expect("default correction params are valid")
    }
}

/// Count-based PM2.5 for one record, µg/m³. Always non-negative for valid
/// bin counts.
pub fn alt_cf3(bins: &SizeBinCounts, params: &CorrectionParams) -> f64 {
    params.cf
        * (params.bins[0].coefficient * bins.x
            + params.bins[1].coefficient * bins.y
            + params.bins[2].coefficient * bins.z)
}

/// Apply [`alt_cf3`] to a sequence of differenced records, preserving order
/// and timestamps.
pub fn correct_series(
    records: &[(Timestamp, SizeBinCounts)],
    params: &CorrectionParams,
    resolution: Resolution,
) -> TimeSeries {
    let points = records
        .iter()
        .map(|(t, bins)| (*t, alt_cf3(bins, params)))
        .collect();
    TimeSeries::from_points(points, resolution, "ug/m3").0
}

/// Agreement statistics between the count-based series and the vendor CF1
/// series over their common timestamps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonStats {
    pub pearson_r: Option<f64>,
    /// mean(cf1) / mean(alt); `None` when the alt mean is zero.
    pub mean_ratio: Option<f64>,
    /// Ordinary least squares of cf1 on alt; `None` when alt has no variance.
    pub ols_slope: Option<f64>,
    pub ols_intercept: Option<f64>,
    pub n: usize,
}

impl ComparisonStats {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "pearson_r,mean_ratio,ols_slope,ols_intercept,n\n{},{},{},{},{}\n",
            opt(self.pearson_r),
            opt(self.mean_ratio),
            opt(self.ols_slope),
            opt(self.ols_intercept),
            self.n
        )
    }
}

/// Compare the count-based series against the vendor series.
///
/// Requires at least two overlapping points. The regression puts cf1 on the
/// left-hand side, so a slope of ~2 means the vendor reads twice as high.
pub fn compare_algorithms(alt: &TimeSeries, cf1: &TimeSeries) -> Result<ComparisonStats> {
    let pair = align(alt, cf1)?;
    let n = pair.len();
    if n < 2 {
        return Err(Error::InsufficientOverlap {
            needed: 2,
            found: n,
        });
    }
    let nf = n as f64;
    let mean_alt = pair.a.iter().sum::<f64>() / nf;
    let mean_cf1 = pair.b.iter().sum::<f64>() / nf;
    let mut var_alt = 0.0;
    let mut cov = 0.0;
    for (a, b) in pair.a.iter().zip(&pair.b) {
        let da = a - mean_alt;
        var_alt += da * da;
        cov += da * (b - mean_cf1);
    }
    let (ols_slope, ols_intercept) = if var_alt > 0.0 {
        let slope = cov / var_alt;
        (Some(slope), Some(mean_cf1 - slope * mean_alt))
    } else {
        (None, None)
    };
    Ok(ComparisonStats {
        pearson_r: pearson_slices(&pair.a, &pair.b),
        mean_ratio: if mean_alt == 0.0 {
            None
        } else {
            Some(mean_cf1 / mean_alt)
        },
        ols_slope,
        ols_intercept,
        n,
    })
}
