//! Aggregation and summary statistics: hourly/daily resampling with
//! completeness thresholds, diurnal profiles, seasonal summaries, annual
//! means, guideline exceedance, and cross-site Pearson correlation.
//!
//! Aggregates are single-pass and deterministic. Under-filled buckets are
//! omitted, never imputed.

use crate::error::{Error, Result};
use crate::timeseries::{align, season_of, AlignedPair, Resolution, Season, TimeSeries, Timestamp};
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;

/// Streaming mean/variance accumulator (Welford's update).
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Welford::default()
    }

    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    pub fn variance(&self, kind: StdKind) -> Option<f64> {
        match kind {
            StdKind::Sample => (self.count >= 2).then(|| self.m2 / (self.count - 1) as f64),
            StdKind::Population => (self.count >= 1).then(|| self.m2 / self.count as f64),
        }
    }

    pub fn std(&self, kind: StdKind) -> Option<f64> {
        self.variance(kind).map(f64::sqrt)
    }
}

/// Which standard deviation to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StdKind {
    /// n − 1 denominator.
    #[default]
    Sample,
    Population,
}

impl fmt::Display for StdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StdKind::Sample => "sample",
            StdKind::Population => "population",
        })
    }
}

impl std::str::FromStr for StdKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sample" => Ok(StdKind::Sample),
            "population" => Ok(StdKind::Population),
            other => Err(Error::InvalidParameter(format!(
                "unknown std kind `{other}`"
            ))),
        }
    }
}

/// Aggregation policy.
#[derive(Debug, Clone, PartialEq)]
pub struct AggConfig {
    /// Minimum fraction of expected points an hourly bucket needs.
    pub hour_completeness: f64,
    /// Minimum fraction of expected points a daily bucket needs.
    pub day_completeness: f64,
    pub std_kind: StdKind,
    /// Fixed offset used for hour-of-day grouping (CAT is UTC+2).
    pub local_utc_offset_hours: i32,
}

impl Default for AggConfig {
    fn default() -> Self {
        AggConfig {
            hour_completeness: 0.75,
            day_completeness: 0.75,
            std_kind: StdKind::Sample,
            local_utc_offset_hours: 2,
        }
    }
}

impl AggConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hour_completeness", self.hour_completeness),
            ("day_completeness", self.day_completeness),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be in (0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Resample to hourly or daily arithmetic means.
///
/// Each target bucket holding at least `completeness * expected` points
/// yields its mean, stamped at the bucket start (UTC); under-filled buckets
/// are omitted. The source resolution must be strictly finer than the target.
pub fn resample(ts: &TimeSeries, target: Resolution, cfg: &AggConfig) -> Result<TimeSeries> {
    cfg.validate()?;
    if !ts.resolution().is_finer_than(target) {
        return Err(Error::ResolutionNotFiner {
            actual: ts.resolution(),
            target,
        });
    }
    let completeness = match target {
        Resolution::Hour => cfg.hour_completeness,
        Resolution::Day => cfg.day_completeness,
        Resolution::Minute => unreachable!("nothing is finer than a minute here"),
    };
    let step = target.seconds();
    let expected = (step / ts.resolution().seconds()) as f64;

    // (sum, count) per bucket; plain summation so a brute-force group-by
    // oracle reproduces the means bit-for-bit.
    let mut buckets: BTreeMap<i64, (f64, u64)> = BTreeMap::new();
    for (t, v) in ts.iter() {
        let bucket = t.unix_seconds().div_euclid(step);
        let entry = buckets.entry(bucket).or_insert((0.0, 0));
        entry.0 += v;
        entry.1 += 1;
    }
    let points = buckets
        .into_iter()
        .filter(|(_, (_, n))| *n as f64 >= completeness * expected)
        .map(|(bucket, (sum, n))| (Timestamp::from_unix_seconds(bucket * step), sum / n as f64))
        .collect();
    Ok(TimeSeries::from_points(points, target, ts.unit()).0)
}

/// Mean/std/count for one hour of day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HourStat {
    pub hour: u32,
    pub mean: Option<f64>,
    /// Undefined (None) when fewer than two samples.
    pub std: Option<f64>,
    pub count: u64,
}

/// Per-hour-of-day statistics over all days of a series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiurnalProfile {
    pub hours: Vec<HourStat>,
}

impl DiurnalProfile {
    /// Hour with the highest mean within `[from, to)`, if any bucket there
    /// has data.
    pub fn argmax_hour_in(&self, from: u32, to: u32) -> Option<u32> {
        self.hours[from as usize..to as usize]
            .iter()
            .filter_map(|h| h.mean.map(|m| (h.hour, m)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(h, _)| h)
    }

    /// Plot-ready CSV with columns `hour,mean,std,n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("hour,mean,std,n\n");
        for h in &self.hours {
            out.push_str(&format!(
                "{},{},{},{}\n",
                h.hour,
                h.mean.map(|v| v.to_string()).unwrap_or_default(),
                h.std.map(|v| v.to_string()).unwrap_or_default(),
                h.count
            ));
        }
        out
    }
}

/// Group an hourly series by local hour of day.
pub fn diurnal_profile(hourly: &TimeSeries, cfg: &AggConfig) -> DiurnalProfile {
    let mut acc = [Welford::new(); 24];
    for (t, v) in hourly.iter() {
        acc[t.local_hour(cfg.local_utc_offset_hours) as usize].push(v);
    }
    let hours = acc
        .iter()
        .enumerate()
        .map(|(hour, w)| HourStat {
            hour: hour as u32,
            mean: w.mean(),
            std: if w.count() >= 2 {
                w.std(cfg.std_kind)
            } else {
                None
            },
            count: w.count(),
        })
        .collect();
    DiurnalProfile { hours }
}

/// Mean/std/count of daily values for one season.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeasonStat {
    pub season: Season,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub count: u64,
}

/// Daily values grouped by season.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeasonalSummary {
    pub seasons: Vec<SeasonStat>,
}

impl SeasonalSummary {
    pub fn get(&self, season: Season) -> &SeasonStat {
        self.seasons
            .iter()
            .find(|s| s.season == season)
            .expect("all four seasons present")
    }

    /// Plot-ready CSV with columns `season,mean,std,n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("season,mean,std,n\n");
        for s in &self.seasons {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.season,
                s.mean.map(|v| v.to_string()).unwrap_or_default(),
                s.std.map(|v| v.to_string()).unwrap_or_default(),
                s.count
            ));
        }
        out
    }
}

/// Group a daily series by the season of each date.
pub fn seasonal_summary(daily: &TimeSeries, cfg: &AggConfig) -> SeasonalSummary {
    let mut acc: [Welford; 4] = [Welford::new(); 4];
    for (t, v) in daily.iter() {
        let idx = Season::ALL
            .iter()
            .position(|s| *s == season_of(&t))
            .unwrap();
        acc[idx].push(v);
    }
    let seasons = Season::ALL
        .iter()
        .zip(acc.iter())
        .map(|(season, w)| SeasonStat {
            season: *season,
            mean: w.mean(),
            std: if w.count() >= 2 {
                w.std(cfg.std_kind)
            } else {
                None
            },
            count: w.count(),
        })
        .collect();
    SeasonalSummary { seasons }
}

/// Mean of available daily values plus the fraction of the spanned days that
/// have data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnualMean {
    pub mean: f64,
    pub coverage: f64,
}

impl AnnualMean {
    pub fn to_csv(&self) -> String {
        format!("annual_mean,coverage\n{},{}\n", self.mean, self.coverage)
    }
}

pub fn annual_mean(daily: &TimeSeries) -> Result<AnnualMean> {
    if daily.is_empty() {
        return Err(Error::EmptySeries);
    }
    if daily.resolution() != Resolution::Day {
        return Err(Error::ResolutionMismatch {
            left: daily.resolution(),
            right: Resolution::Day,
        });
    }
    let mean = daily.values().iter().sum::<f64>() / daily.len() as f64;
    let first = daily.first_time().unwrap().date_index();
    let last = daily.last_time().unwrap().date_index();
    let span_days = (last - first + 1) as f64;
    Ok(AnnualMean {
        mean,
        coverage: daily.len() as f64 / span_days,
    })
}

/// Days strictly above a guideline concentration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExceedanceReport {
    pub guideline: f64,
    pub days_over: u64,
    pub days_total: u64,
    pub fraction: f64,
}

impl ExceedanceReport {
    pub fn to_csv(&self) -> String {
        format!(
            "guideline,days_over,days_total,fraction\n{},{},{},{}\n",
            self.guideline, self.days_over, self.days_total, self.fraction
        )
    }
}

/// Count daily means strictly above the guideline (a value exactly at the
/// guideline does not exceed it).
pub fn exceedance(daily: &TimeSeries, guideline: f64) -> ExceedanceReport {
    let days_total = daily.len() as u64;
    let days_over = daily.values().iter().filter(|v| **v > guideline).count() as u64;
    ExceedanceReport {
        guideline,
        days_over,
        days_total,
        fraction: if days_total == 0 {
            0.0
        } else {
            days_over as f64 / days_total as f64
        },
    }
}

/// Sample Pearson correlation of two equal-length slices.
///
/// `None` when fewer than two points or when either side has zero variance.
pub fn pearson_slices(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len().min(b.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean_a = a.iter().take(n).sum::<f64>() / nf;
    let mean_b = b.iter().take(n).sum::<f64>() / nf;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.iter().zip(b.iter()).take(n) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return None;
    }
    Some((cov / (var_a.sqrt() * var_b.sqrt())).clamp(-1.0, 1.0))
}

/// Sample Pearson correlation of an aligned pair.
pub fn pearson(pair: &AlignedPair) -> Option<f64> {
    pearson_slices(&pair.a, &pair.b)
}

/// Pairwise Pearson correlation across sites, with overlap counts.
///
/// Symmetric with a unit diagonal by construction; a cell is `None` when the
/// pair overlaps on fewer than two points or has no variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub r: Vec<Vec<Option<f64>>>,
    pub overlap: Vec<Vec<usize>>,
}

impl CorrelationMatrix {
    /// Plot-ready CSV: header `site,<labels...>`, one row of r values per
    /// site, undefined cells left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("site");
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (i, label) in self.labels.iter().enumerate() {
            out.push_str(label);
            for cell in &self.r[i] {
                out.push(',');
                if let Some(v) = cell {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn correlation_matrix(sites: &[(String, &TimeSeries)]) -> Result<CorrelationMatrix> {
    let k = sites.len();
    if k < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            found: k,
        });
    }
    let mut r = vec![vec![None; k]; k];
    let mut overlap = vec![vec![0usize; k]; k];
    for i in 0..k {
        r[i][i] = Some(1.0);
        overlap[i][i] = sites[i].1.len();
        for j in (i + 1)..k {
            let pair = align(sites[i].1, sites[j].1)?;
            let value = pearson(&pair);
            r[i][j] = value;
            r[j][i] = value;
            overlap[i][j] = pair.len();
            overlap[j][i] = pair.len();
        }
    }
    Ok(CorrelationMatrix {
        labels: sites.iter().map(|(l, _)| l.clone()).collect(),
        r,
        overlap,
    })
}

impl Serialize for StdKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn minute(n: i64) -> Timestamp {
        Timestamp::from_unix_seconds(n * 60)
    }

    fn hour(n: i64) -> Timestamp {
        Timestamp::from_unix_seconds(n * 3_600)
    }

    fn day(n: i64) -> Timestamp {
        Timestamp::from_unix_seconds(n * 86_400)
    }

    fn minute_series(points: Vec<(Timestamp, f64)>) -> TimeSeries {
        TimeSeries::from_points(points, Resolution::Minute, "ug/m3").0
    }

    #[test]
    fn welford_matches_two_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let n = rng.gen_range(2..500);
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..150.0)).collect();
            let mut w = Welford::new();
            for v in &values {
                w.push(*v);
            }
            let mean = values.iter().sum::<f64>() / n as f64;
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            let sample = (ss / (n - 1) as f64).sqrt();
            let pop = (ss / n as f64).sqrt();
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
            assert!(rel(w.mean().unwrap(), mean) < 1e-10);
            assert!(rel(w.std(StdKind::Sample).unwrap(), sample) < 1e-10);
            assert!(rel(w.std(StdKind::Population).unwrap(), pop) < 1e-10);
        }
    }

    #[test]
    fn resample_full_hour_of_constants() {
        let points = (0..60).map(|i| (minute(i), 10.0)).collect();
        let hourly = resample(
            &minute_series(points),
            Resolution::Hour,
            &AggConfig::default(),
        )
        .unwrap();
        assert_eq!(hourly.len(), 1);
        assert_eq!(hourly.values()[0], 10.0);
        assert_eq!(hourly.times()[0], hour(0));
        assert_eq!(hourly.resolution(), Resolution::Hour);
    }

    #[test]
    fn resample_omits_underfilled_buckets() {
        let points = (0..30).map(|i| (minute(i), 10.0)).collect();
        let hourly = resample(
            &minute_series(points),
            Resolution::Hour,
            &AggConfig::default(),
        )
        .unwrap();
        assert!(hourly.is_empty());
    }

    #[test]
    fn resample_arithmetic_mean() {
        let points = (0..60).map(|i| (minute(i), (i + 1) as f64)).collect();
        let hourly = resample(
            &minute_series(points),
            Resolution::Hour,
            &AggConfig::default(),
        )
        .unwrap();
        assert_eq!(hourly.values()[0], 30.5);
    }

    #[test]
    fn resample_rejects_non_finer_source() {
        let hourly = TimeSeries::empty(Resolution::Hour, "ug/m3");
        assert!(matches!(
            resample(&hourly, Resolution::Hour, &AggConfig::default()),
            Err(Error::ResolutionNotFiner { .. })
        ));
    }

    #[test]
    fn resample_matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..30 {
            let n = rng.gen_range(1..5_000);
            let points: Vec<(Timestamp, f64)> = (0..n)
                .map(|_| (minute(rng.gen_range(0..10_000)), rng.gen_range(0.0..100.0)))
                .collect();
            let series = minute_series(points);
            let got = resample(&series, Resolution::Hour, &AggConfig::default()).unwrap();

            // Brute-force group-by oracle.
            let mut groups: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
            for (t, v) in series.iter() {
                groups
                    .entry(t.unix_seconds().div_euclid(3600))
                    .or_default()
                    .push(v);
            }
            let expected: Vec<(Timestamp, f64)> = groups
                .into_iter()
                .filter(|(_, vs)| vs.len() as f64 >= 0.75 * 60.0)
                .map(|(b, vs)| {
                    (
                        Timestamp::from_unix_seconds(b * 3600),
                        vs.iter().sum::<f64>() / vs.len() as f64,
                    )
                })
                .collect();
            assert_eq!(got.times().len(), expected.len());
            for ((t, v), (et, ev)) in got.iter().zip(expected) {
                assert_eq!(t, et);
                assert!((v - ev).abs() <= 1e-12 * ev.abs().max(1.0));
            }
        }
    }

    #[test]
    fn aggregate_mean_within_bucket_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let points: Vec<(Timestamp, f64)> = (0..240)
            .map(|i| (minute(i), rng.gen_range(0.0..100.0)))
            .collect();
        let series = minute_series(points.clone());
        let hourly = resample(&series, Resolution::Hour, &AggConfig::default()).unwrap();
        for (t, mean) in hourly.iter() {
            let bucket = t.unix_seconds() / 3600;
            let members: Vec<f64> = points
                .iter()
                .filter(|(pt, _)| pt.unix_seconds().div_euclid(3600) == bucket)
                .map(|(_, v)| *v)
                .collect();
            let min = members.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = members.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(mean >= min - 1e-12 && mean <= max + 1e-12);
        }
    }

    #[test]
    fn diurnal_constant_series() {
        let points = (0..48).map(|i| (hour(i), 20.0)).collect();
        let hourly = TimeSeries::from_points(points, Resolution::Hour, "ug/m3").0;
        let profile = diurnal_profile(&hourly, &AggConfig::default());
        assert_eq!(profile.hours.len(), 24);
        for h in &profile.hours {
            assert_eq!(h.mean, Some(20.0));
            assert_eq!(h.std, Some(0.0));
            assert_eq!(h.count, 2);
        }
    }

    #[test]
    fn diurnal_single_hour_of_day() {
        // Daily points at 08:00 local (06:00 UTC with +2 offset).
        let points = (0..5)
            .map(|d| {
                (
                    Timestamp::from_ymd_hms(2023, 3, d + 1, 6, 0, 0).unwrap(),
                    10.0,
                )
            })
            .collect();
        let hourly = TimeSeries::from_points(points, Resolution::Hour, "ug/m3").0;
        let profile = diurnal_profile(&hourly, &AggConfig::default());
        for h in &profile.hours {
            if h.hour == 8 {
                assert_eq!(h.count, 5);
            } else {
                assert_eq!(h.count, 0);
                assert_eq!(h.mean, None);
                assert_eq!(h.std, None);
            }
        }
    }

    #[test]
    fn diurnal_two_point_sample_std() {
        let points = vec![
            (Timestamp::from_ymd_hms(2023, 3, 1, 6, 0, 0).unwrap(), 10.0),
            (Timestamp::from_ymd_hms(2023, 3, 2, 6, 0, 0).unwrap(), 20.0),
        ];
        let hourly = TimeSeries::from_points(points, Resolution::Hour, "ug/m3").0;
        let profile = diurnal_profile(&hourly, &AggConfig::default());
        let h8 = &profile.hours[8];
        assert_eq!(h8.mean, Some(15.0));
        assert!((h8.std.unwrap() - 50f64.sqrt()).abs() < 1e-12); // ~7.0711
    }

    #[test]
    fn diurnal_empty_series_has_zero_counts() {
        let profile = diurnal_profile(
            &TimeSeries::empty(Resolution::Hour, "ug/m3"),
            &AggConfig::default(),
        );
        assert!(profile
            .hours
            .iter()
            .all(|h| h.count == 0 && h.mean.is_none()));
    }

    #[test]
    fn seasonal_groups_by_season() {
        // All in July: only the long dry season has data.
        let points = (0..10)
            .map(|d| {
                (
                    Timestamp::from_ymd_hms(2023, 7, d + 1, 0, 0, 0).unwrap(),
                    30.0,
                )
            })
            .collect();
        let daily = TimeSeries::from_points(points, Resolution::Day, "ug/m3").0;
        let summary = seasonal_summary(&daily, &AggConfig::default());
        assert_eq!(summary.get(Season::LongDry).count, 10);
        assert_eq!(summary.get(Season::LongWet).count, 0);
        let total: u64 = summary.seasons.iter().map(|s| s.count).sum();
        assert_eq!(total, daily.len() as u64);
    }

    #[test]
    fn seasonal_constant_year_has_equal_means() {
        let start = Timestamp::from_ymd_hms(2023, 1, 1, 0, 0, 0).unwrap();
        let points = (0..365)
            .map(|d| (start.plus_seconds(d * 86_400), 20.0))
            .collect();
        let daily = TimeSeries::from_points(points, Resolution::Day, "ug/m3").0;
        let summary = seasonal_summary(&daily, &AggConfig::default());
        for stat in &summary.seasons {
            assert_eq!(stat.mean, Some(20.0));
            assert!(stat.count > 0);
        }
    }

    #[test]
    fn seasonal_means_per_group() {
        let points = vec![
            (Timestamp::from_ymd_hms(2023, 7, 1, 0, 0, 0).unwrap(), 30.0),
            (Timestamp::from_ymd_hms(2023, 7, 2, 0, 0, 0).unwrap(), 40.0),
            (Timestamp::from_ymd_hms(2023, 4, 1, 0, 0, 0).unwrap(), 10.0),
            (Timestamp::from_ymd_hms(2023, 4, 2, 0, 0, 0).unwrap(), 20.0),
        ];
        let daily = TimeSeries::from_points(points, Resolution::Day, "ug/m3").0;
        let summary = seasonal_summary(&daily, &AggConfig::default());
        assert_eq!(summary.get(Season::LongDry).mean, Some(35.0));
        assert_eq!(summary.get(Season::LongWet).mean, Some(15.0));
    }

    #[test]
    fn annual_mean_constant_year() {
        let points = (0..365).map(|d| (day(d), 28.3)).collect();
        let daily = TimeSeries::from_points(points, Resolution::Day, "ug/m3").0;
        let annual = annual_mean(&daily).unwrap();
        assert!((annual.mean - 28.3).abs() < 1e-12);
        assert_eq!(annual.coverage, 1.0);
    }

    #[test]
    fn annual_mean_edge_cases() {
        let one = TimeSeries::from_points(vec![(day(5), 42.0)], Resolution::Day, "ug/m3").0;
        let annual = annual_mean(&one).unwrap();
        assert_eq!(annual.mean, 42.0);
        assert_eq!(annual.coverage, 1.0);

        let two = TimeSeries::from_points(
            vec![(day(5), 10.0), (day(6), 30.0)],
            Resolution::Day,
            "ug/m3",
        )
        .0;
        let annual = annual_mean(&two).unwrap();
        assert_eq!(annual.mean, 20.0);
        assert_eq!(annual.coverage, 1.0);

        assert!(matches!(
            annual_mean(&TimeSeries::empty(Resolution::Day, "ug/m3")),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn exceedance_counts_strictly() {
        let all_over = TimeSeries::from_points(
            (0..10).map(|d| (day(d), 30.0)).collect(),
            Resolution::Day,
            "ug/m3",
        )
        .0;
        let report = exceedance(&all_over, 25.0);
        assert_eq!(report.days_over, 10);
        assert_eq!(report.fraction, 1.0);

        let at_guideline = TimeSeries::from_points(
            (0..10).map(|d| (day(d), 25.0)).collect(),
            Resolution::Day,
            "ug/m3",
        )
        .0;
        assert_eq!(exceedance(&at_guideline, 25.0).days_over, 0);

        let mixed = TimeSeries::from_points(
            vec![(day(0), 20.0), (day(1), 26.0), (day(2), 30.0)],
            Resolution::Day,
            "ug/m3",
        )
        .0;
        let report = exceedance(&mixed, 25.0);
        assert_eq!(report.days_over, 2);
        assert!((report.fraction - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pearson_known_values() {
        assert!((pearson_slices(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson_slices(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        let r = pearson_slices(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.9819805060619659).abs() < 1e-12, "{r}");
    }

    #[test]
    fn pearson_undefined_cases() {
        assert_eq!(pearson_slices(&[1.0], &[2.0]), None);
        assert_eq!(pearson_slices(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]), None);
    }

    #[test]
    fn pearson_affine_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..100 {
            let n = rng.gen_range(3..50);
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
            let r = match pearson_slices(&a, &b) {
                Some(r) => r,
                None => continue,
            };
            let k: f64 = rng.gen_range(0.1..5.0);
            let c: f64 = rng.gen_range(-50.0..50.0);
            let pos: Vec<f64> = b.iter().map(|v| k * v + c).collect();
            let neg: Vec<f64> = b.iter().map(|v| -k * v + c).collect();
            assert!((pearson_slices(&a, &pos).unwrap() - r).abs() < 1e-9);
            assert!((pearson_slices(&a, &neg).unwrap() + r).abs() < 1e-9);
        }
    }

    fn daily_series(values: &[f64], start: i64) -> TimeSeries {
        TimeSeries::from_points(
            values
                .iter()
                .enumerate()
                .map(|(i, v)| (day(start + i as i64), *v))
                .collect(),
            Resolution::Day,
            "ug/m3",
        )
        .0
    }

    #[test]
    fn correlation_matrix_identical_series() {
        let a = daily_series(&[1.0, 2.0, 3.0, 4.0], 0);
        let sites = vec![("a".to_string(), &a), ("b".to_string(), &a)];
        let m = correlation_matrix(&sites).unwrap();
        assert_eq!(m.r[0][0], Some(1.0));
        assert_eq!(m.r[1][1], Some(1.0));
        assert!((m.r[0][1].unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(m.overlap[0][1], 4);
    }

    #[test]
    fn correlation_matrix_disjoint_site_is_undefined() {
        let a = daily_series(&[1.0, 2.0, 3.0], 0);
        let b = daily_series(&[2.0, 4.0, 6.0], 0);
        let c = daily_series(&[1.0, 2.0, 3.0], 100);
        let sites = vec![
            ("a".to_string(), &a),
            ("b".to_string(), &b),
            ("c".to_string(), &c),
        ];
        let m = correlation_matrix(&sites).unwrap();
        assert_eq!(m.r[0][2], None);
        assert_eq!(m.r[2][0], None);
        assert_eq!(m.r[2][2], Some(1.0));
        assert_eq!(m.overlap[0][2], 0);
    }

    #[test]
    fn correlation_matrix_linear_invariance_and_symmetry() {
        let a = daily_series(&[1.0, 5.0, 2.0, 8.0], 0);
        let b = daily_series(&[3.0, 11.0, 5.0, 17.0], 0); // 2a + 1
        let sites = vec![("a".to_string(), &a), ("b".to_string(), &b)];
        let m = correlation_matrix(&sites).unwrap();
        assert!((m.r[0][1].unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(m.r[0][1], m.r[1][0]);
    }

    #[test]
    fn correlation_matrix_needs_two_sites() {
        let a = daily_series(&[1.0, 2.0], 0);
        let sites = vec![("a".to_string(), &a)];
        assert!(correlation_matrix(&sites).is_err());
    }

    #[test]
    fn diurnal_csv_columns_are_stable() {
        let profile = diurnal_profile(
            &TimeSeries::empty(Resolution::Hour, "ug/m3"),
            &AggConfig::default(),
        );
        let csv = profile.to_csv();
        assert!(csv.starts_with("hour,mean,std,n\n0,,,0\n"));
        assert_eq!(csv.lines().count(), 25);
    }
}
