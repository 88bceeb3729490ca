//! Intermediate record store: a flat columnar text file, inspectable and
//! diffable.
//!
//! ```text
//! # aq-store v1
//! time_utc,bin_x,bin_y,bin_z,pm25_cf1
//! 2022-08-01T00:00:00Z,9862.5,1350.2,144.9,50
//! ```
//!
//! Timestamps are UTC RFC 3339; bin columns are differenced per-bin counts in
//! particles/dL; pm25_cf1 is the vendor value in µg/m³.

use crate::CliError;
use aq_core::ingest::SizeBinCounts;
use aq_core::timeseries::Timestamp;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

const MAGIC: &str = "# aq-store v1";
const HEADER: &str = "time_utc,bin_x,bin_y,bin_z,pm25_cf1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoreRow {
    pub time: Timestamp,
    pub bins: SizeBinCounts,
    pub pm25_cf1: f64,
}

pub fn write_store(path: &Path, rows: &[StoreRow]) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::Data(format!("cannot create `{}`: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e: std::io::Error| CliError::Data(format!("write `{}`: {e}", path.display()));
    writeln!(w, "{MAGIC}").map_err(io_err)?;
    writeln!(w, "{HEADER}").map_err(io_err)?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            row.time, row.bins.x, row.bins.y, row.bins.z, row.pm25_cf1
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn read_store(path: &Path) -> Result<Vec<StoreRow>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| {
        CliError::Data(format!(
            "cannot open store `{}` (run `aq ingest` first?): {e}",
            path.display()
        ))
    })?;
    let reader = BufReader::new(file);
    let bad = |line: usize, what: &str| {
        CliError::Data(format!("store `{}` line {line}: {what}", path.display()))
    };
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Data(format!("read `{}`: {e}", path.display())))?;
        let line_no = i + 1;
        if line_no == 1 {
            if line.trim() != MAGIC {
                return Err(bad(1, "missing `# aq-store v1` header"));
            }
            continue;
        }
        if line_no == 2 {
            if line.trim() != HEADER {
                return Err(bad(2, "unexpected column header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(line_no, "expected 5 fields"));
        }
        let time =
            Timestamp::parse_utc(fields[0]).map_err(|_| bad(line_no, "unparseable timestamp"))?;
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| bad(line_no, "unparseable number"))
        };
        rows.push(StoreRow {
            time,
            bins: SizeBinCounts {
                x: num(fields[1])?,
                y: num(fields[2])?,
                z: num(fields[3])?,
            },
            pm25_cf1: num(fields[4])?,
        });
    }
    Ok(rows)
}
