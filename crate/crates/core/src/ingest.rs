//! CSV ingestion for PurpleAir-style particle-counter records: schema-driven
//! parsing, cumulative-channel differencing into size bins, and quality
//! control.
//!
//! Sensors report cumulative counts (particles per deciliter) above the
//! diameter thresholds 0.3, 0.5, 1.0, 2.5, 5.0 and optionally 10 µm. The
//! per-bin counts consumed by the correction are the differences of adjacent
//! channels.

use crate::error::{Error, Result};
use crate::timeseries::Timestamp;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;

/// Cumulative particle counts above each diameter threshold, particles/dL.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulativeCounts {
    pub gt_0_3: f64,
    pub gt_0_5: f64,
    pub gt_1_0: f64,
    pub gt_2_5: f64,
    pub gt_5_0: f64,
    pub gt_10_0: Option<f64>,
}

impl CumulativeCounts {
    /// Channels must be non-increasing from the smallest threshold up.
    pub fn is_monotone(&self) -> bool {
        let base = self.gt_0_3 >= self.gt_0_5
            && self.gt_0_5 >= self.gt_1_0
            && self.gt_1_0 >= self.gt_2_5
            && self.gt_2_5 >= self.gt_5_0;
        match self.gt_10_0 {
            Some(c) => base && self.gt_5_0 >= c,
            None => base,
        }
    }

    pub fn max_channel(&self) -> f64 {
        // Channels are non-negative, so the first one dominates when the
        // record is monotone; take the max anyway for dirty data.
        [
            self.gt_0_3,
            self.gt_0_5,
            self.gt_1_0,
            self.gt_2_5,
            self.gt_5_0,
            self.gt_10_0.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0f64, f64::max)
    }
}

/// One timestamped raw sensor reading.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub timestamp: Timestamp,
    pub counts_gt: CumulativeCounts,
    /// Vendor PM2.5 (CF1 algorithm), µg/m³.
    pub pm25_cf1: f64,
    pub pm25_atm: Option<f64>,
    pub temperature_c: Option<f64>,
    pub humidity_pct: Option<f64>,
    pub pressure_hpa: Option<f64>,
}

/// Differenced counts in the three correction bins, particles/dL.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeBinCounts {
    /// 0.3–0.5 µm
    pub x: f64,
    /// 0.5–1.0 µm
    pub y: f64,
    /// 1.0–2.5 µm
    pub z: f64,
}

/// Difference cumulative channels into per-bin counts.
///
/// Negative differences (sensor noise inverting adjacent channels) clamp to
/// zero; the returned flag is true when any clamping happened.
pub fn difference_bins(record: &RawRecord) -> (SizeBinCounts, bool) {
    let c = &record.counts_gt;
    let dx = c.gt_0_3 - c.gt_0_5;
    let dy = c.gt_0_5 - c.gt_1_0;
    let dz = c.gt_1_0 - c.gt_2_5;
    let clamped = dx < 0.0 || dy < 0.0 || dz < 0.0;
    (
        SizeBinCounts {
            x: dx.max(0.0),
            y: dy.max(0.0),
            z: dz.max(0.0),
        },
        clamped,
    )
}

/// Maps logical record fields to CSV header names, so vendor column renames
/// need no code change. Optional fields are read when their column exists.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub timestamp: String,
    pub count_gt_0_3: String,
    pub count_gt_0_5: String,
    pub count_gt_1_0: String,
    pub count_gt_2_5: String,
    pub count_gt_5_0: String,
    pub count_gt_10_0: Option<String>,
    pub pm25_cf1: String,
    pub pm25_atm: Option<String>,
    pub temperature_c: Option<String>,
    pub humidity_pct: Option<String>,
    pub pressure_hpa: Option<String>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            timestamp: "time".into(),
            count_gt_0_3: "p_gt_0_3_um".into(),
            count_gt_0_5: "p_gt_0_5_um".into(),
            count_gt_1_0: "p_gt_1_0_um".into(),
            count_gt_2_5: "p_gt_2_5_um".into(),
            count_gt_5_0: "p_gt_5_0_um".into(),
            count_gt_10_0: Some("p_gt_10_0_um".into()),
            pm25_cf1: "pm2_5_cf1".into(),
            pm25_atm: Some("pm2_5_atm".into()),
            temperature_c: Some("temp_c".into()),
            humidity_pct: Some("rh_pct".into()),
            pressure_hpa: Some("pressure_hpa".into()),
        }
    }
}

impl CsvSchema {
    /// Parse a `key = header_name` schema file. Unlisted keys keep their
    /// defaults; `#`-prefixed lines are comments.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut schema = CsvSchema::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Schema(format!("line {}: expected `key = column`", i + 1)))?;
            let key = key.trim();
            let value = value.trim().to_string();
            if value.is_empty() {
                return Err(Error::Schema(format!("line {}: empty column name", i + 1)));
            }
            match key {
                "timestamp" => schema.timestamp = value,
                "count_gt_0_3" => schema.count_gt_0_3 = value,
                "count_gt_0_5" => schema.count_gt_0_5 = value,
                "count_gt_1_0" => schema.count_gt_1_0 = value,
                "count_gt_2_5" => schema.count_gt_2_5 = value,
                "count_gt_5_0" => schema.count_gt_5_0 = value,
                "count_gt_10_0" => schema.count_gt_10_0 = Some(value),
                "pm25_cf1" => schema.pm25_cf1 = value,
                "pm25_atm" => schema.pm25_atm = Some(value),
                "temperature_c" => schema.temperature_c = Some(value),
                "humidity_pct" => schema.humidity_pct = Some(value),
                "pressure_hpa" => schema.pressure_hpa = Some(value),
                other => {
                    return Err(Error::Schema(format!(
                        "line {}: unknown key `{other}`",
                        i + 1
                    )))
                }
            }
        }
        Ok(schema)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: &str| out.push_str(&format!("{k} = {v}\n"));
        push("timestamp", &self.timestamp);
        push("count_gt_0_3", &self.count_gt_0_3);
        push("count_gt_0_5", &self.count_gt_0_5);
        push("count_gt_1_0", &self.count_gt_1_0);
        push("count_gt_2_5", &self.count_gt_2_5);
        push("count_gt_5_0", &self.count_gt_5_0);
        if let Some(c) = &self.count_gt_10_0 {
            push("count_gt_10_0", c);
        }
        push("pm25_cf1", &self.pm25_cf1);
        if let Some(c) = &self.pm25_atm {
            push("pm25_atm", c);
        }
        if let Some(c) = &self.temperature_c {
            push("temperature_c", c);
        }
        if let Some(c) = &self.humidity_pct {
            push("humidity_pct", c);
        }
        if let Some(c) = &self.pressure_hpa {
            push("pressure_hpa", c);
        }
        out
    }
}

/// A row that failed to parse, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    pub line: usize,
    pub reason: String,
}

struct ColumnIndices {
    timestamp: usize,
    counts: [usize; 5],
    count_gt_10_0: Option<usize>,
    pm25_cf1: usize,
    pm25_atm: Option<usize>,
    temperature_c: Option<usize>,
    humidity_pct: Option<usize>,
    pressure_hpa: Option<usize>,
    width: usize,
}

impl ColumnIndices {
    fn resolve(schema: &CsvSchema, header: &[&str]) -> Result<Self> {
        let find = |name: &str| header.iter().position(|h| *h == name);
        let require = |name: &str| find(name).ok_or_else(|| Error::MissingColumn(name.to_string()));
        let optional = |name: &Option<String>| name.as_deref().and_then(find);
        Ok(ColumnIndices {
            timestamp: require(&schema.timestamp)?,
            counts: [
                require(&schema.count_gt_0_3)?,
                require(&schema.count_gt_0_5)?,
                require(&schema.count_gt_1_0)?,
                require(&schema.count_gt_2_5)?,
                require(&schema.count_gt_5_0)?,
            ],
            count_gt_10_0: optional(&schema.count_gt_10_0),
            pm25_cf1: require(&schema.pm25_cf1)?,
            pm25_atm: optional(&schema.pm25_atm),
            temperature_c: optional(&schema.temperature_c),
            humidity_pct: optional(&schema.humidity_pct),
            pressure_hpa: optional(&schema.pressure_hpa),
            width: header.len(),
        })
    }
}

/// Parse a CSV stream into records plus per-row errors.
///
/// Every data row becomes exactly one [`RawRecord`] or one [`RowError`];
/// parsing never aborts on a bad row. A mandatory column missing from the
/// header is a whole-file error. Timestamps in the file are naive local time
/// and are normalized to UTC with the given fixed offset.
pub fn parse_csv<R: BufRead>(
    reader: R,
    schema: &CsvSchema,
    local_utc_offset_hours: i32,
) -> Result<(Vec<RawRecord>, Vec<RowError>)> {
    let mut lines = reader.lines();
    let header_line = match lines.next() {
        Some(line) => line?,
        None => return Err(Error::Schema("empty input: no header row".into())),
    };
    let header: Vec<&str> = header_line.split(',').map(str::trim).collect();
    let idx = ColumnIndices::resolve(schema, &header)?;

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match parse_row(&fields, &idx, &header, local_utc_offset_hours) {
            Ok(record) => records.push(record),
            Err(reason) => errors.push(RowError {
                line: line_no,
                reason,
            }),
        }
    }
    Ok((records, errors))
}

fn parse_row(
    fields: &[&str],
    idx: &ColumnIndices,
    header: &[&str],
    offset: i32,
) -> std::result::Result<RawRecord, String> {
    if fields.len() != idx.width {
        return Err(format!(
            "expected {} fields, found {}",
            idx.width,
            fields.len()
        ));
    }
    let timestamp = Timestamp::parse_local(fields[idx.timestamp], offset)
        .map_err(|_| format!("unparseable timestamp `{}`", fields[idx.timestamp]))?;

    let count = |col: usize| -> std::result::Result<f64, String> {
        let v: f64 = fields[col]
            .parse()
            .map_err(|_| format!("unparseable field `{}`", header[col]))?;
        if !v.is_finite() {
            return Err(format!("unparseable field `{}`", header[col]));
        }
        if v < 0.0 {
            return Err(format!("negative count in `{}`", header[col]));
        }
        Ok(v)
    };
    let optional = |col: Option<usize>| -> std::result::Result<Option<f64>, String> {
        match col {
            Some(c) if !fields[c].is_empty() => {
                let v: f64 = fields[c]
                    .parse()
                    .map_err(|_| format!("unparseable field `{}`", header[c]))?;
                Ok(if v.is_finite() { Some(v) } else { None })
            }
            _ => Ok(None),
        }
    };

    let pm25_cf1: f64 = fields[idx.pm25_cf1]
        .parse()
        .map_err(|_| format!("unparseable field `{}`", header[idx.pm25_cf1]))?;
    if !pm25_cf1.is_finite() {
        return Err(format!("unparseable field `{}`", header[idx.pm25_cf1]));
    }
    if pm25_cf1 < 0.0 {
        return Err(format!("negative value in `{}`", header[idx.pm25_cf1]));
    }

    Ok(RawRecord {
        timestamp,
        counts_gt: CumulativeCounts {
            gt_0_3: count(idx.counts[0])?,
            gt_0_5: count(idx.counts[1])?,
            gt_1_0: count(idx.counts[2])?,
            gt_2_5: count(idx.counts[3])?,
            gt_5_0: count(idx.counts[4])?,
            gt_10_0: match idx.count_gt_10_0 {
                Some(c) => Some(count(c)?),
                None => None,
            },
        },
        pm25_cf1,
        pm25_atm: optional(idx.pm25_atm)?,
        temperature_c: optional(idx.temperature_c)?,
        humidity_pct: optional(idx.humidity_pct)?,
        pressure_hpa: optional(idx.pressure_hpa)?,
    })
}

/// Quality-control limits.
#[derive(Debug, Clone, PartialEq)]
pub struct QcConfig {
    /// Reject records with pm25_cf1 above this, µg/m³.
    pub max_pm25: f64,
    /// Reject records with any cumulative channel above this, particles/dL.
    pub max_count: f64,
    pub require_monotone_counts: bool,
    /// Fixed offset used when parsing local file timestamps.
    pub local_utc_offset_hours: i32,
}

impl Default for QcConfig {
    fn default() -> Self {
        QcConfig {
            max_pm25: 1_000.0,
            max_count: 1.0e6,
            require_monotone_counts: true,
            local_utc_offset_hours: 2,
        }
    }
}

/// Why a record was rejected by QC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum QcReason {
    Pm25Range,
    CountRange,
    NonMonotone,
}

impl fmt::Display for QcReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            QcReason::Pm25Range => "pm25_range",
            QcReason::CountRange => "count_range",
            QcReason::NonMonotone => "non_monotone",
        };
        f.write_str(s)
    }
}

impl Serialize for QcReason {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Accounting of one QC pass: every input record is either accepted or
/// counted under exactly one rejection reason.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected_by_reason: BTreeMap<QcReason, usize>,
    pub first: Option<Timestamp>,
    pub last: Option<Timestamp>,
}

impl IngestReport {
    pub fn rejected_total(&self) -> usize {
        self.rejected_by_reason.values().sum()
    }

    pub fn total(&self) -> usize {
        self.accepted + self.rejected_total()
    }
}

fn qc_reason(record: &RawRecord, cfg: &QcConfig) -> Option<QcReason> {
    if record.pm25_cf1 > cfg.max_pm25 {
        return Some(QcReason::Pm25Range);
    }
    if record.counts_gt.max_channel() > cfg.max_count {
        return Some(QcReason::CountRange);
    }
    if cfg.require_monotone_counts && !record.counts_gt.is_monotone() {
        return Some(QcReason::NonMonotone);
    }
    None
}

/// Split records into clean ones and a rejection report.
pub fn qc_filter(records: Vec<RawRecord>, cfg: &QcConfig) -> (Vec<RawRecord>, IngestReport) {
    let mut clean = Vec::with_capacity(records.len());
    let mut report = IngestReport::default();
    for record in records {
        match qc_reason(&record, cfg) {
            Some(reason) => *report.rejected_by_reason.entry(reason).or_default() += 1,
            None => {
                report.first = Some(match report.first {
                    Some(t) => t.min(record.timestamp),
                    None => record.timestamp,
                });
                report.last = Some(match report.last {
                    Some(t) => t.max(record.timestamp),
                    None => record.timestamp,
                });
                clean.push(record);
            }
        }
    }
    report.accepted = clean.len();
    (clean, report)
}
