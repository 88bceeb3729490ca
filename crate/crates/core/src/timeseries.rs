//! Time-series value types, calendar logic, and the Bujumbura season mapping.
//!
//! Everything here is an immutable value after construction and safe to share
//! across threads. All timestamps are UTC; local-time conversion happens only
//! at ingestion and presentation.

use crate::error::{Error, Result};
use chrono::{DateTime, Datelike, Duration, NaiveDateTime, TimeZone, Utc};
use serde::{Serialize, Serializer};
use std::fmt;

/// A UTC instant with second precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    pub fn from_utc(instant: DateTime<Utc>) -> Self {
        Timestamp(instant)
    }

    pub fn from_ymd_hms(y: i32, mo: u32, d: u32, h: u32, mi: u32, s: u32) -> Option<Self> {
        Utc.with_ymd_and_hms(y, mo, d, h, mi, s)
            .single()
            .map(Timestamp)
    }

    pub fn from_unix_seconds(secs: i64) -> Self {
        Timestamp(
            Utc.timestamp_opt(secs, 0)
                .single()
                .expect("valid unix timestamp"),
        )
    }

    pub fn unix_seconds(&self) -> i64 {
        self.0.timestamp()
    }

    /// Parse an RFC 3339 timestamp such as `2022-08-01T06:30:00Z`.
    pub fn parse_utc(s: &str) -> Result<Self> {
        DateTime::parse_from_rfc3339(s)
            .map(|dt| Timestamp(dt.with_timezone(&Utc)))
            .map_err(|_| Error::Timestamp(s.to_string()))
    }

    /// Parse a naive local timestamp and normalize it to UTC using a fixed
    /// offset in hours (CAT is UTC+2 and has no DST).
    pub fn parse_local(s: &str, utc_offset_hours: i32) -> Result<Self> {
        const FORMATS: [&str; 4] = [
            "%Y-%m-%d %H:%M:%S",
            "%Y-%m-%dT%H:%M:%S",
            "%Y-%m-%d %H:%M",
            "%Y-%m-%dT%H:%M",
        ];
        for fmt in FORMATS {
            if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
                let utc = naive - Duration::hours(i64::from(utc_offset_hours));
                return Ok(Timestamp(Utc.from_utc_datetime(&utc)));
            }
        }
        Err(Error::Timestamp(s.to_string()))
    }

    pub fn plus_seconds(&self, secs: i64) -> Self {
        Timestamp(self.0 + Duration::seconds(secs))
    }

    /// Floor to the start of the enclosing minute/hour/day (UTC).
    pub fn floor_to(&self, resolution: Resolution) -> Self {
        let step = resolution.seconds();
        Timestamp::from_unix_seconds(self.unix_seconds().div_euclid(step) * step)
    }

    /// Hour of day 0..=23 in a fixed-offset local time.
    pub fn local_hour(&self, utc_offset_hours: i32) -> u32 {
        let hours = self.unix_seconds().div_euclid(3600) + i64::from(utc_offset_hours);
        hours.rem_euclid(24) as u32
    }

    pub fn month_day(&self) -> (u32, u32) {
        (self.0.month(), self.0.day())
    }

    /// Whole days since the Unix epoch (UTC calendar date index).
    pub fn date_index(&self) -> i64 {
        self.unix_seconds().div_euclid(86_400)
    }

    /// Render in local time as `YYYY-MM-DD HH:MM:SS`.
    pub fn format_local(&self, utc_offset_hours: i32) -> String {
        let local = self.0 + Duration::hours(i64::from(utc_offset_hours));
        local.format("%Y-%m-%d %H:%M:%S").to_string()
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%dT%H:%M:%SZ"))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Nominal spacing of a series. Declares cadence, not completeness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Minute,
    Hour,
    Day,
}

impl Resolution {
    pub fn seconds(&self) -> i64 {
        match self {
            Resolution::Minute => 60,
            Resolution::Hour => 3_600,
            Resolution::Day => 86_400,
        }
    }

    pub fn is_finer_than(&self, other: Resolution) -> bool {
        self.seconds() < other.seconds()
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Resolution::Minute => "minute",
            Resolution::Hour => "hour",
            Resolution::Day => "day",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minute" => Ok(Resolution::Minute),
            "hour" => Ok(Resolution::Hour),
            "day" => Ok(Resolution::Day),
            other => Err(Error::InvalidParameter(format!(
                "unknown resolution `{other}`"
            ))),
        }
    }
}

impl Serialize for Resolution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// The four Bujumbura seasons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Season {
    LongDry,
    ShortWet,
    ShortDry,
    LongWet,
}

impl Season {
    pub const ALL: [Season; 4] = [
        Season::LongDry,
        Season::ShortWet,
        Season::ShortDry,
        Season::LongWet,
    ];

    pub fn is_dry(&self) -> bool {
        matches!(self, Season::LongDry | Season::ShortDry)
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Season::LongDry => "long_dry",
            Season::ShortWet => "short_wet",
            Season::ShortDry => "short_dry",
            Season::LongWet => "long_wet",
        };
        f.write_str(s)
    }
}

impl Serialize for Season {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Season of the UTC calendar date.
///
/// Jun 1 – Aug 31 long dry; Sep 1 – Jan 14 short wet; Jan 15 – Feb 14 short
/// dry; Feb 15 – May 31 long wet. Mid-month boundaries fall on day 15, and
/// Jan 1–14 belongs to the short wet season.
pub fn season_of(ts: &Timestamp) -> Season {
    let (month, day) = ts.month_day();
    match (month, day) {
        (6..=8, _) => Season::LongDry,
        (9..=12, _) => Season::ShortWet,
        (1, 1..=14) => Season::ShortWet,
        (1, _) => Season::ShortDry,
        (2, 1..=14) => Season::ShortDry,
        (2, _) => Season::LongWet,
        (3..=5, _) => Season::LongWet,
        _ => unreachable!("month out of range"),
    }
}

/// Counts of points discarded while constructing a [`TimeSeries`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SanitizeStats {
    pub dropped_non_finite: usize,
    pub deduplicated: usize,
}

/// A sorted, unique-timestamp sequence of (timestamp, value) pairs with a
/// declared resolution. Values are always finite; gaps are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<Timestamp>,
    values: Vec<f64>,
    resolution: Resolution,
    unit: String,
}

impl TimeSeries {
    /// Build a series from possibly unsorted, duplicated, or non-finite input.
    ///
    /// Non-finite values are dropped, points are sorted, and duplicate
    /// timestamps keep the first occurrence (in input order). The stats report
    /// how many points were discarded either way.
    pub fn from_points(
        points: Vec<(Timestamp, f64)>,
        resolution: Resolution,
        unit: impl Into<String>,
    ) -> (Self, SanitizeStats) {
        let mut stats = SanitizeStats::default();
        let mut pts: Vec<(Timestamp, f64)> = Vec::with_capacity(points.len());
        for (t, v) in points {
            if v.is_finite() {
                pts.push((t, v));
            } else {
                stats.dropped_non_finite += 1;
            }
        }
        // Stable sort, so the keep-first rule is order-independent.
        pts.sort_by_key(|(t, _)| *t);
        let mut times = Vec::with_capacity(pts.len());
        let mut values = Vec::with_capacity(pts.len());
        for (t, v) in pts {
            if times.last() == Some(&t) {
                stats.deduplicated += 1;
            } else {
                times.push(t);
                values.push(v);
            }
        }
        (
            TimeSeries {
                times,
                values,
                resolution,
                unit: unit.into(),
            },
            stats,
        )
    }

    pub fn empty(resolution: Resolution, unit: impl Into<String>) -> Self {
        TimeSeries {
            times: Vec::new(),
            values: Vec::new(),
            resolution,
            unit: unit.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[Timestamp] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn first_time(&self) -> Option<Timestamp> {
        self.times.first().copied()
    }

    pub fn last_time(&self) -> Option<Timestamp> {
        self.times.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Timestamp, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Plot-ready CSV with columns `time_utc,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_utc,value\n");
        for (t, v) in self.iter() {
            out.push_str(&format!("{t},{v}\n"));
        }
        out
    }
}

/// Two equal-length value sequences over a common timestamp grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    pub times: Vec<Timestamp>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl AlignedPair {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Intersect two series on their common timestamps.
pub fn align(a: &TimeSeries, b: &TimeSeries) -> Result<AlignedPair> {
    if a.resolution() != b.resolution() {
        return Err(Error::ResolutionMismatch {
            left: a.resolution(),
            right: b.resolution(),
        });
    }
    let mut times = Vec::new();
    let mut av = Vec::new();
    let mut bv = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        match a.times[i].cmp(&b.times[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                times.push(a.times[i]);
                av.push(a.values[i]);
                bv.push(b.values[j]);
                i += 1;
                j += 1;
            }
        }
    }
    Ok(AlignedPair {
        times,
        a: av,
        b: bv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ts(y: i32, mo: u32, d: u32) -> Timestamp {
        Timestamp::from_ymd_hms(y, mo, d, 12, 0, 0).unwrap()
    }

    fn minute(n: i64) -> Timestamp {
        Timestamp::from_unix_seconds(n * 60)
    }

    #[test]
    fn season_examples() {
        assert_eq!(season_of(&ts(2023, 7, 15)), Season::LongDry);
        assert_eq!(season_of(&ts(2023, 2, 14)), Season::ShortDry);
        assert_eq!(season_of(&ts(2023, 2, 15)), Season::LongWet);
        assert_eq!(season_of(&ts(2022, 12, 31)), Season::ShortWet);
        assert_eq!(season_of(&ts(2023, 1, 14)), Season::ShortWet);
        assert_eq!(season_of(&ts(2023, 1, 15)), Season::ShortDry);
        assert_eq!(season_of(&ts(2023, 6, 1)), Season::LongDry);
        assert_eq!(season_of(&ts(2023, 9, 1)), Season::ShortWet);
        assert_eq!(season_of(&ts(2023, 5, 31)), Season::LongWet);
    }

    #[test]
    fn season_partition_is_exhaustive() {
        // Every date of a non-leap and a leap year maps to exactly one season.
        for (year, expected_days) in [(2023i32, 365i64), (2024, 366)] {
            let start = Timestamp::from_ymd_hms(year, 1, 1, 0, 0, 0).unwrap();
            let mut counts = [0i64; 4];
            let mut day = start;
            let mut total = 0;
            while day.month_day() != (1, 1) || total == 0 {
                let season = season_of(&day);
                let idx = Season::ALL.iter().position(|s| *s == season).unwrap();
                counts[idx] += 1;
                total += 1;
                day = day.plus_seconds(86_400);
                if total > 400 {
                    panic!("runaway loop");
                }
            }
            assert_eq!(total, expected_days);
            assert_eq!(counts.iter().sum::<i64>(), expected_days);
            // long dry: Jun+Jul+Aug
            assert_eq!(counts[0], 92);
            // short dry: Jan 15 - Feb 14
            assert_eq!(counts[2], 31);
        }
    }

    #[test]
    fn from_points_sorts() {
        let (s, st) = TimeSeries::from_points(
            vec![(minute(2), 5.0), (minute(1), 3.0)],
            Resolution::Minute,
            "ug/m3",
        );
        assert_eq!(s.times(), &[minute(1), minute(2)]);
        assert_eq!(s.values(), &[3.0, 5.0]);
        assert_eq!(st, SanitizeStats::default());
    }

    #[test]
    fn from_points_keeps_first_duplicate() {
        let (s, st) = TimeSeries::from_points(
            vec![(minute(1), 3.0), (minute(1), 9.0)],
            Resolution::Minute,
            "ug/m3",
        );
        assert_eq!(s.len(), 1);
        assert_eq!(s.values(), &[3.0]);
        assert_eq!(st.deduplicated, 1);
    }

    #[test]
    fn from_points_drops_non_finite() {
        let (s, st) =
            TimeSeries::from_points(vec![(minute(1), f64::NAN)], Resolution::Minute, "ug/m3");
        assert!(s.is_empty());
        assert_eq!(st.dropped_non_finite, 1);
    }

    #[test]
    fn from_points_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(0..200);
            let points: Vec<(Timestamp, f64)> = (0..n)
                .map(|_| {
                    let t = minute(rng.gen_range(0..100));
                    let v = if rng.gen_bool(0.05) {
                        f64::NAN
                    } else {
                        rng.gen_range(-50.0..150.0)
                    };
                    (t, v)
                })
                .collect();
            let (s1, _) = TimeSeries::from_points(points, Resolution::Minute, "ug/m3");
            let rebuilt: Vec<(Timestamp, f64)> = s1.iter().collect();
            let (s2, st2) = TimeSeries::from_points(rebuilt, Resolution::Minute, "ug/m3");
            assert_eq!(s1, s2);
            assert_eq!(st2, SanitizeStats::default());
        }
    }

    #[test]
    fn align_intersects() {
        let (a, _) = TimeSeries::from_points(
            vec![(minute(1), 1.0), (minute(2), 2.0), (minute(3), 3.0)],
            Resolution::Minute,
            "ug/m3",
        );
        let (b, _) = TimeSeries::from_points(
            vec![(minute(2), 20.0), (minute(3), 30.0), (minute(4), 40.0)],
            Resolution::Minute,
            "ug/m3",
        );
        let pair = align(&a, &b).unwrap();
        assert_eq!(pair.times, vec![minute(2), minute(3)]);
        assert_eq!(pair.a, vec![2.0, 3.0]);
        assert_eq!(pair.b, vec![20.0, 30.0]);
    }

    #[test]
    fn align_disjoint_is_empty() {
        let (a, _) = TimeSeries::from_points(vec![(minute(1), 1.0)], Resolution::Minute, "ug/m3");
        let (b, _) = TimeSeries::from_points(vec![(minute(9), 9.0)], Resolution::Minute, "ug/m3");
        assert!(align(&a, &b).unwrap().is_empty());
    }

    #[test]
    fn align_identical_is_full_length() {
        let (a, _) = TimeSeries::from_points(
            (0..10).map(|i| (minute(i), i as f64)).collect(),
            Resolution::Minute,
            "ug/m3",
        );
        let pair = align(&a, &a.clone()).unwrap();
        assert_eq!(pair.len(), 10);
    }

    #[test]
    fn align_is_symmetric_with_roles_swapped() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mk = |rng: &mut ChaCha8Rng| {
                let points: Vec<(Timestamp, f64)> = (0..rng.gen_range(0..50))
                    .map(|_| (minute(rng.gen_range(0..60)), rng.gen_range(0.0..100.0)))
                    .collect();
                TimeSeries::from_points(points, Resolution::Minute, "ug/m3").0
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let ab = align(&a, &b).unwrap();
            let ba = align(&b, &a).unwrap();
            assert_eq!(ab.times, ba.times);
            assert_eq!(ab.a, ba.b);
            assert_eq!(ab.b, ba.a);
        }
    }

    #[test]
    fn align_rejects_resolution_mismatch() {
        let a = TimeSeries::empty(Resolution::Minute, "ug/m3");
        let b = TimeSeries::empty(Resolution::Hour, "ug/m3");
        assert!(matches!(
            align(&a, &b),
            Err(Error::ResolutionMismatch { .. })
        ));
    }

    #[test]
    fn local_hour_applies_offset() {
        let t = Timestamp::from_ymd_hms(2023, 3, 10, 23, 30, 0).unwrap();
        assert_eq!(t.local_hour(2), 1);
        assert_eq!(t.local_hour(0), 23);
    }

    #[test]
    fn parse_local_normalizes_to_utc() {
        let t = Timestamp::parse_local("2022-08-01 08:00:00", 2).unwrap();
        assert_eq!(t.to_string(), "2022-08-01T06:00:00Z");
        assert_eq!(t.format_local(2), "2022-08-01 08:00:00");
    }

    #[test]
    fn parse_utc_round_trips() {
        let t = Timestamp::from_ymd_hms(2023, 1, 15, 4, 5, 6).unwrap();
        assert_eq!(Timestamp::parse_utc(&t.to_string()).unwrap(), t);
    }
}
