//! Synthetic minute-level sensor data with the qualitative structure of real
//! urban PM2.5: a double diurnal peak, dry-season elevation, and seeded
//! noise.
//!
//! The generator works backwards from a true PM2.5 signal: it distributes the
//! implied mass across the three size bins in fixed proportions, divides by
//! the per-bin coefficients to get counts, and accumulates those into the
//! cumulative channels the ingest module expects. Correcting the synthesized
//! record therefore recovers the injected signal (to float precision), which
//! is what makes end-to-end pipeline tests possible. The vendor channel is
//! emitted as 2.0 x the true signal to exercise the comparison harness.

use crate::correction::CorrectionParams;
use crate::ingest::{CsvSchema, CumulativeCounts, RawRecord};
use crate::timeseries::{season_of, Resolution, Timestamp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{self, Write};

/// Shape of one synthetic site.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteProfile {
    /// Baseline concentration, µg/m³.
    pub base_level: f64,
    /// Local hour of the morning peak, 0..=23.
    pub morning_peak_hour: u32,
    /// Local hour of the evening peak, 0..=23.
    pub evening_peak_hour: u32,
    /// Peak height above baseline, µg/m³.
    pub peak_amplitude: f64,
    /// Multiplier applied during the dry seasons, >= 1.
    pub dry_multiplier: f64,
    /// Std-dev of per-minute Gaussian noise, µg/m³.
    pub noise_std: f64,
    pub seed: u64,
    /// Fixed offset between the site's local time and UTC.
    pub utc_offset_hours: i32,
}

impl Default for SiteProfile {
    fn default() -> Self {
        SiteProfile {
            base_level: 25.0,
            morning_peak_hour: 7,
            evening_peak_hour: 19,
            peak_amplitude: 15.0,
            dry_multiplier: 1.5,
            noise_std: 5.0,
            seed: 1,
            utc_offset_hours: 2,
        }
    }
}

/// Width of the diurnal peaks, hours.
const PEAK_SIGMA_H: f64 = 1.5;

/// Fraction of total particle mass assigned to each bin (fine, medium,
/// coarse). Any fixed split keeps the round trip exact; this one puts the
/// count majority in the finest bin, as real distributions do.
const MASS_FRACTIONS: [f64; 3] = [0.45, 0.25, 0.30];

fn circular_hour_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % 24.0;
    d.min(24.0 - d)
}

/// Deterministic part of the signal (no noise), µg/m³.
pub fn true_signal(profile: &SiteProfile, ts: &Timestamp) -> f64 {
    let local_h = (ts.unix_seconds().rem_euclid(86_400) as f64 / 3_600.0
        + f64::from(profile.utc_offset_hours))
        % 24.0;
    let bump = |peak: u32| {
        let d = circular_hour_distance(local_h, f64::from(peak));
        (-d * d / (2.0 * PEAK_SIGMA_H * PEAK_SIGMA_H)).exp()
    };
    let shape = profile.base_level
        + profile.peak_amplitude
            * (bump(profile.morning_peak_hour) + bump(profile.evening_peak_hour));
    let multiplier = if season_of(ts).is_dry() {
        profile.dry_multiplier
    } else {
        1.0
    };
    shape * multiplier
}

/// Box-Muller standard normal from two uniform draws. Always consumes exactly
/// two draws, keeping the record stream seed-stable.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn record_for(ts: Timestamp, truth: f64, params: &CorrectionParams, local_h: f64) -> RawRecord {
    // Invert the correction: pick per-bin counts whose weighted sum equals
    // truth / cf exactly.
    let mass_total = truth / params.cf;
    let x = MASS_FRACTIONS[0] * mass_total / params.bins[0].coefficient;
    let y = MASS_FRACTIONS[1] * mass_total / params.bins[1].coefficient;
    let z = MASS_FRACTIONS[2] * mass_total / params.bins[2].coefficient;
    // Small monotone tails beyond 2.5 µm; they cancel out of the differences.
    let gt_2_5 = 0.02 * z;
    let gt_5_0 = 0.5 * gt_2_5;
    let gt_10_0 = 0.25 * gt_2_5;
    let gt_1_0 = gt_2_5 + z;
    let gt_0_5 = gt_1_0 + y;
    let gt_0_3 = gt_0_5 + x;

    RawRecord {
        timestamp: ts,
        counts_gt: CumulativeCounts {
            gt_0_3,
            gt_0_5,
            gt_1_0,
            gt_2_5,
            gt_5_0,
            gt_10_0: Some(gt_10_0),
        },
        pm25_cf1: 2.0 * truth,
        pm25_atm: Some(2.0 * truth),
        temperature_c: Some(24.0 + 4.0 * ((local_h - 10.0) * std::f64::consts::TAU / 24.0).sin()),
        humidity_pct: Some(72.0 - 6.0 * ((local_h - 14.0) * std::f64::consts::TAU / 24.0).sin()),
        pressure_hpa: Some(925.0),
    }
}

/// Generate minute-resolution records for `[start, end)`.
///
/// The true signal is base + Gaussian diurnal bumps, scaled by the seasonal
/// multiplier, plus seeded Gaussian noise, clamped at zero. Identical
/// profiles produce identical record streams.
pub fn generate(profile: &SiteProfile, start: Timestamp, end: Timestamp) -> Vec<RawRecord> {
    let params = CorrectionParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let mut records = Vec::new();
    let mut t = start.floor_to(Resolution::Minute);
    while t < end {
        let noise = profile.noise_std * standard_normal(&mut rng);
        let truth = (true_signal(profile, &t) + noise).max(0.0);
        let local_h = (t.unix_seconds().rem_euclid(86_400) as f64 / 3_600.0
            + f64::from(profile.utc_offset_hours))
            % 24.0;
        records.push(record_for(t, truth, &params, local_h));
        t = t.plus_seconds(60);
    }
    records
}

/// Write records in the exact CSV schema the ingest module consumes, with
/// timestamps rendered in local time.
pub fn write_csv<W: Write>(
    records: &[RawRecord],
    schema: &CsvSchema,
    local_utc_offset_hours: i32,
    writer: &mut W,
) -> io::Result<()> {
    let mut header = vec![
        schema.timestamp.as_str(),
        schema.count_gt_0_3.as_str(),
        schema.count_gt_0_5.as_str(),
        schema.count_gt_1_0.as_str(),
        schema.count_gt_2_5.as_str(),
        schema.count_gt_5_0.as_str(),
    ];
    if let Some(name) = &schema.count_gt_10_0 {
        header.push(name);
    }
    header.push(schema.pm25_cf1.as_str());
    for name in [
        &schema.pm25_atm,
        &schema.temperature_c,
        &schema.humidity_pct,
        &schema.pressure_hpa,
    ]
    .into_iter()
    .flatten()
    {
        header.push(name);
    }
    writeln!(writer, "{}", header.join(","))?;

    let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        let mut fields = vec![
            r.timestamp.format_local(local_utc_offset_hours),
            r.counts_gt.gt_0_3.to_string(),
            r.counts_gt.gt_0_5.to_string(),
            r.counts_gt.gt_1_0.to_string(),
            r.counts_gt.gt_2_5.to_string(),
            r.counts_gt.gt_5_0.to_string(),
        ];
        if schema.count_gt_10_0.is_some() {
            fields.push(fmt_opt(r.counts_gt.gt_10_0));
        }
        fields.push(r.pm25_cf1.to_string());
        if schema.pm25_atm.is_some() {
            fields.push(fmt_opt(r.pm25_atm));
        }
        if schema.temperature_c.is_some() {
            fields.push(fmt_opt(r.temperature_c));
        }
        if schema.humidity_pct.is_some() {
            fields.push(fmt_opt(r.humidity_pct));
        }
        if schema.pressure_hpa.is_some() {
            fields.push(fmt_opt(r.pressure_hpa));
        }
        writeln!(writer, "{}", fields.join(","))?;
    }
    Ok(())
}
