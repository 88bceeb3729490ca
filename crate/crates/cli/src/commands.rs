//! Subcommand implementations. Every command is deterministic given
//! (inputs, config, seed): site iteration follows config order and all float
//! formatting uses shortest round-trip rendering.

use crate::config::{OutputFormat, RunConfig, SiteSection};
use crate::store::{read_store, write_store, StoreRow};
use crate::CliError;
use aq_core::analytics::{
    annual_mean, correlation_matrix, diurnal_profile, exceedance, resample, seasonal_summary,
};
use aq_core::correction::{compare_algorithms, correct_series};
use aq_core::forecast::{run_forecast, save_model};
use aq_core::ingest::{difference_bins, parse_csv, qc_filter, CsvSchema, IngestReport, RowError};
use aq_core::synth::{generate, write_csv};
use aq_core::timeseries::{Resolution, TimeSeries};
use serde::Serialize;
use std::io::BufReader;
use std::path::{Path, PathBuf};

fn ensure_out_dir(cfg: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| {
        CliError::Data(format!(
            "cannot create output directory `{}`: {e}",
            cfg.out_dir.display()
        ))
    })
}

fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Data(format!("cannot write `{}`: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("serialize `{}`: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

fn out_path(cfg: &RunConfig, label: &str, analysis: &str) -> PathBuf {
    cfg.out_dir
        .join(format!("{label}.{analysis}.{}", cfg.format.extension()))
}

fn store_path(cfg: &RunConfig, label: &str) -> PathBuf {
    cfg.out_dir.join(format!("{label}.store.csv"))
}

fn load_schema(site: &SiteSection) -> Result<CsvSchema, CliError> {
    match &site.schema {
        None => Ok(CsvSchema::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read schema `{}`: {e}", path.display()))
            })?;
            CsvSchema::from_text(&text)
                .map_err(|e| CliError::Usage(format!("schema `{}`: {e}", path.display())))
        }
    }
}

pub fn cmd_synth(
    cfg: &RunConfig,
    site: Option<&str>,
    out: Option<&Path>,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    let sites = cfg.select_sites(site)?;
    let with_synth: Vec<&SiteSection> = sites.into_iter().filter(|s| s.synth.is_some()).collect();
    if with_synth.is_empty() {
        return Err(CliError::Usage(
            "no selected site has a [sites.synth] section".into(),
        ));
    }
    if out.is_some() && with_synth.len() > 1 {
        return Err(CliError::Usage(
            "--out needs a single site; pass --site".into(),
        ));
    }
    for site in with_synth {
        let section = site.synth.as_ref().expect("filtered above");
        let offset = cfg.qc.local_utc_offset_hours;
        let (profile, start, end) = section.to_profile(seed_override, offset)?;
        let records = generate(&profile, start, end);
        let target = out
            .map(Path::to_path_buf)
            .unwrap_or_else(|| site.input.clone());
        if let Some(parent) = target.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| {
                    CliError::Data(format!("cannot create `{}`: {e}", parent.display()))
                })?;
            }
        }
        let file = std::fs::File::create(&target)
            .map_err(|e| CliError::Data(format!("cannot create `{}`: {e}", target.display())))?;
        let mut writer = std::io::BufWriter::new(file);
        write_csv(&records, &CsvSchema::default(), offset, &mut writer)
            .map_err(|e| CliError::Data(format!("write `{}`: {e}", target.display())))?;
        println!(
            "synth {}: {} records -> {}",
            site.label,
            records.len(),
            target.display()
        );
    }
    Ok(())
}

/// Full ingest accounting: parse failures plus the QC report.
#[derive(Debug, Serialize)]
struct IngestSummary {
    rows: usize,
    row_errors: Vec<RowError>,
    qc: IngestReport,
}

pub fn cmd_ingest(cfg: &RunConfig, site: Option<&str>) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let qc_cfg = cfg.qc.to_config();
    for site in cfg.select_sites(site)? {
        let schema = load_schema(site)?;
        let file = std::fs::File::open(&site.input).map_err(|e| {
            CliError::Data(format!(
                "site `{}`: cannot open `{}`: {e}",
                site.label,
                site.input.display()
            ))
        })?;
        let (records, row_errors) =
            parse_csv(BufReader::new(file), &schema, qc_cfg.local_utc_offset_hours)
                .map_err(|e| CliError::Data(format!("site `{}`: {e}", site.label)))?;
        let rows = records.len() + row_errors.len();
        let (clean, report) = qc_filter(records, &qc_cfg);

        let store_rows: Vec<StoreRow> = clean
            .iter()
            .map(|r| StoreRow {
                time: r.timestamp,
                bins: difference_bins(r).0,
                pm25_cf1: r.pm25_cf1,
            })
            .collect();
        write_store(&store_path(cfg, &site.label), &store_rows)?;

        println!(
            "ingest {}: {} rows, {} accepted, {} rejected, {} row errors",
            site.label,
            rows,
            report.accepted,
            report.rejected_total(),
            row_errors.len()
        );
        let summary = IngestSummary {
            rows,
            row_errors,
            qc: report,
        };
        write_json(
            &cfg.out_dir.join(format!("{}.ingest.json", site.label)),
            &summary,
        )?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SeriesPoint {
    time: String,
    value: f64,
}

#[derive(Debug, Serialize)]
struct SeriesExport {
    resolution: Resolution,
    unit: String,
    points: Vec<SeriesPoint>,
}

impl SeriesExport {
    fn from_series(series: &TimeSeries) -> Self {
        SeriesExport {
            resolution: series.resolution(),
            unit: series.unit().to_string(),
            points: series
                .iter()
                .map(|(t, v)| SeriesPoint {
                    time: t.to_string(),
                    value: v,
                })
                .collect(),
        }
    }
}

fn load_site_minute_series(
    cfg: &RunConfig,
    site: &SiteSection,
) -> Result<(TimeSeries, TimeSeries), CliError> {
    let rows = read_store(&store_path(cfg, &site.label))?;
    if rows.is_empty() {
        return Err(CliError::Data(format!(
            "store for site `{}` is empty",
            site.label
        )));
    }
    let params = cfg.correction.to_params()?;
    let binned: Vec<_> = rows.iter().map(|r| (r.time, r.bins)).collect();
    let alt = correct_series(&binned, &params, Resolution::Minute);
    let cf1 = TimeSeries::from_points(
        rows.iter().map(|r| (r.time, r.pm25_cf1)).collect(),
        Resolution::Minute,
        "ug/m3",
    )
    .0;
    Ok((alt, cf1))
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let agg = cfg.aggregation.to_config()?;
    let mut dailies: Vec<(String, TimeSeries)> = Vec::new();

    for site in &cfg.sites {
        let label = &site.label;
        let (alt, cf1) = load_site_minute_series(cfg, site)?;
        let hourly = resample(&alt, Resolution::Hour, &agg)
            .map_err(|e| CliError::Data(format!("site `{label}`: {e}")))?;
        let daily = resample(&alt, Resolution::Day, &agg)
            .map_err(|e| CliError::Data(format!("site `{label}`: {e}")))?;

        let profile = diurnal_profile(&hourly, &agg);
        let seasonal = seasonal_summary(&daily, &agg);
        let exceed = exceedance(&daily, cfg.aggregation.guideline);

        match cfg.format {
            OutputFormat::Csv => {
                write_text(&out_path(cfg, label, "diurnal"), &profile.to_csv())?;
                write_text(&out_path(cfg, label, "daily"), &daily.to_csv())?;
                write_text(&out_path(cfg, label, "seasonal"), &seasonal.to_csv())?;
                write_text(&out_path(cfg, label, "exceedance"), &exceed.to_csv())?;
            }
            OutputFormat::Json => {
                write_json(&out_path(cfg, label, "diurnal"), &profile)?;
                write_json(
                    &out_path(cfg, label, "daily"),
                    &SeriesExport::from_series(&daily),
                )?;
                write_json(&out_path(cfg, label, "seasonal"), &seasonal)?;
                write_json(&out_path(cfg, label, "exceedance"), &exceed)?;
            }
        }

        if daily.is_empty() {
            eprintln!("warning: site `{label}` has no complete days; skipping annual mean");
        } else {
            let annual =
                annual_mean(&daily).map_err(|e| CliError::Data(format!("site `{label}`: {e}")))?;
            match cfg.format {
                OutputFormat::Csv => write_text(&out_path(cfg, label, "annual"), &annual.to_csv())?,
                OutputFormat::Json => write_json(&out_path(cfg, label, "annual"), &annual)?,
            }
        }

        match compare_algorithms(&alt, &cf1) {
            Ok(stats) => match cfg.format {
                OutputFormat::Csv => {
                    write_text(&out_path(cfg, label, "comparison"), &stats.to_csv())?
                }
                OutputFormat::Json => write_json(&out_path(cfg, label, "comparison"), &stats)?,
            },
            Err(e) => eprintln!("warning: site `{label}`: comparison skipped: {e}"),
        }

        println!(
            "analyze {label}: {} hourly points, {} daily points",
            hourly.len(),
            daily.len()
        );
        dailies.push((label.clone(), daily));
    }

    if dailies.len() >= 2 {
        let refs: Vec<(String, &TimeSeries)> =
            dailies.iter().map(|(l, s)| (l.clone(), s)).collect();
        let matrix =
            correlation_matrix(&refs).map_err(|e| CliError::Data(format!("correlation: {e}")))?;
        let undefined = matrix
            .r
            .iter()
            .flatten()
            .filter(|cell| cell.is_none())
            .count();
        if undefined > 0 {
            eprintln!("warning: correlation matrix has {undefined} undefined cells");
        }
        let path = cfg
            .out_dir
            .join(format!("correlation.{}", cfg.format.extension()));
        match cfg.format {
            OutputFormat::Csv => write_text(&path, &matrix.to_csv())?,
            OutputFormat::Json => write_json(&path, &matrix)?,
        }
        println!("analyze: correlation matrix over {} sites", dailies.len());
    } else {
        eprintln!("warning: correlation matrix needs at least 2 sites; skipped");
    }
    Ok(())
}

pub fn cmd_forecast(
    cfg: &RunConfig,
    site: Option<&str>,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let agg = cfg.aggregation.to_config()?;
    let train_cfg = cfg.train.to_config(seed_override)?;
    for site in cfg.select_sites(site)? {
        let label = &site.label;
        let (alt, _) = load_site_minute_series(cfg, site)?;
        let hourly = resample(&alt, Resolution::Hour, &agg)
            .map_err(|e| CliError::Data(format!("site `{label}`: {e}")))?;
        let outcome = run_forecast(&hourly, &train_cfg)
            .map_err(|e| CliError::Data(format!("site `{label}`: {e}")))?;

        let model_path = cfg.out_dir.join(format!("{label}.model.txt"));
        save_model(&outcome.model, &model_path)
            .map_err(|e| CliError::Data(format!("site `{label}`: {e}")))?;
        match cfg.format {
            OutputFormat::Csv => {
                write_text(&out_path(cfg, label, "eval"), &outcome.report.to_csv())?;
                write_text(
                    &out_path(cfg, label, "forecast"),
                    &outcome.test_points_csv(),
                )?;
            }
            OutputFormat::Json => {
                write_json(&out_path(cfg, label, "eval"), &outcome.report)?;
                write_json(&out_path(cfg, label, "forecast"), &outcome.test_points)?;
            }
        }
        let report = &outcome.report;
        println!(
            "forecast {label}: rmse {:.3}, mae {:.3}, baseline rmse {:.3}, n_test {}",
            report.rmse, report.mae, report.baseline_rmse, report.n_test
        );
    }
    Ok(())
}
