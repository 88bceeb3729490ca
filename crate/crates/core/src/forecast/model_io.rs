//! Self-describing text format for trained models.
//!
//! Layout (one `key = value` per header line, then the flattened parameters
//! in canonical order, one per line):
//!
//! ```text
//! aq-model v1
//! cell = lstm
//! hidden = 32
//! window = 24
//! horizon = 1
//! epochs = 50
//! batch_size = 32
//! learning_rate = 0.001
//! split = 0.8
//! seed = 42
//! clip_norm = 5
//! scaler_min = 3.25
//! scaler_max = 87.5
//! params = 4513
//! <one f64 per line>
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting, so a saved
//! model reloads bit-exactly and reruns reproduce identical bytes.

use super::cell::{CellKind, CellParams};
use super::window::Scaler;
use super::{ForecastModel, TrainConfig};
use crate::error::{Error, Result};
use std::path::Path;

const MAGIC: &str = "aq-model v1";

pub fn model_to_string(model: &ForecastModel) -> String {
    let cfg = &model.config;
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("cell = {}\n", cfg.cell));
    out.push_str(&format!("hidden = {}\n", cfg.hidden));
    out.push_str(&format!("window = {}\n", cfg.window));
    out.push_str(&format!("horizon = {}\n", cfg.horizon));
    out.push_str(&format!("epochs = {}\n", cfg.epochs));
    out.push_str(&format!("batch_size = {}\n", cfg.batch_size));
    out.push_str(&format!("learning_rate = {}\n", cfg.learning_rate));
    out.push_str(&format!("split = {}\n", cfg.split));
    out.push_str(&format!("seed = {}\n", cfg.seed));
    out.push_str(&format!("clip_norm = {}\n", cfg.clip_norm));
    out.push_str(&format!("scaler_min = {}\n", model.scaler.min));
    out.push_str(&format!("scaler_max = {}\n", model.scaler.max));
    let flat = model.params.to_flat();
    out.push_str(&format!("params = {}\n", flat.len()));
    for v in flat {
        out.push_str(&format!("{v}\n"));
    }
    out
}

pub fn model_from_str(text: &str) -> Result<ForecastModel> {
    let mut lines = text.lines();
    match lines.next() {
        Some(line) if line.trim() == MAGIC => {}
        other => {
            return Err(Error::ModelFormat(format!(
                "expected `{MAGIC}` header, found {other:?}"
            )))
        }
    }

    let mut cfg = TrainConfig::default();
    let mut scaler_min = None;
    let mut scaler_max = None;
    let mut n_params = None;
    for line in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::ModelFormat(format!("expected `key = value`, found `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| Error::ModelFormat(format!("bad {what}: `{value}`"));
        match key {
            "cell" => cfg.cell = value.parse()?,
            "hidden" => cfg.hidden = value.parse().map_err(|_| bad("hidden"))?,
            "window" => cfg.window = value.parse().map_err(|_| bad("window"))?,
            "horizon" => cfg.horizon = value.parse().map_err(|_| bad("horizon"))?,
            "epochs" => cfg.epochs = value.parse().map_err(|_| bad("epochs"))?,
            "batch_size" => cfg.batch_size = value.parse().map_err(|_| bad("batch_size"))?,
            "learning_rate" => {
                cfg.learning_rate = value.parse().map_err(|_| bad("learning_rate"))?
            }
            "split" => cfg.split = value.parse().map_err(|_| bad("split"))?,
            "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
            "clip_norm" => cfg.clip_norm = value.parse().map_err(|_| bad("clip_norm"))?,
            "scaler_min" => scaler_min = Some(value.parse().map_err(|_| bad("scaler_min"))?),
            "scaler_max" => scaler_max = Some(value.parse().map_err(|_| bad("scaler_max"))?),
            "params" => {
                n_params = Some(value.parse::<usize>().map_err(|_| bad("params"))?);
                break; // parameter block follows
            }
            other => return Err(Error::ModelFormat(format!("unknown key `{other}`"))),
        }
    }
    let n_params = n_params.ok_or_else(|| Error::ModelFormat("missing `params` count".into()))?;
    let scaler = Scaler {
        min: scaler_min.ok_or_else(|| Error::ModelFormat("missing `scaler_min`".into()))?,
        max: scaler_max.ok_or_else(|| Error::ModelFormat("missing `scaler_max`".into()))?,
    };

    let mut flat = Vec::with_capacity(n_params);
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::ModelFormat(format!("bad parameter value `{line}`")))?;
        if !v.is_finite() {
            return Err(Error::ModelFormat(format!("non-finite parameter `{line}`")));
        }
        flat.push(v);
    }
    if flat.len() != n_params {
        return Err(Error::ModelFormat(format!(
            "expected {n_params} parameters, found {}",
            flat.len()
        )));
    }
    let expected = match cfg.cell {
        CellKind::Rnn => super::cell::RnnParams::flat_len(cfg.hidden),
        CellKind::Lstm => super::cell::LstmParams::flat_len(cfg.hidden),
    };
    if n_params != expected {
        return Err(Error::ModelFormat(format!(
            "{} with hidden size {} needs {expected} parameters, file has {n_params}",
            cfg.cell, cfg.hidden
        )));
    }
    let params = CellParams::from_flat(cfg.cell, cfg.hidden, &flat)?;
    Ok(ForecastModel {
        params,
        scaler,
        config: cfg,
    })
}

pub fn save_model(model: &ForecastModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_string(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ForecastModel> {
    let text = std::fs::read_to_string(path)?;
    model_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(kind: CellKind) -> ForecastModel {
        let cfg = TrainConfig {
            cell: kind,
            hidden: 3,
            window: 5,
            learning_rate: 0.003,
            seed: 11,
            ..TrainConfig::default()
        };
        ForecastModel {
            params: CellParams::init(kind, 3, &mut ChaCha8Rng::seed_from_u64(2)),
            scaler: Scaler {
                min: 1.25,
                max: 88.5,
            },
            config: cfg,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        for kind in [CellKind::Rnn, CellKind::Lstm] {
            let m = model(kind);
            let text = model_to_string(&m);
            let loaded = model_from_str(&text).unwrap();
            assert_eq!(loaded.params, m.params);
            assert_eq!(loaded.scaler, m.scaler);
            assert_eq!(loaded.config, m.config);
            // Serialization is deterministic byte-for-byte.
            assert_eq!(model_to_string(&loaded), text);
        }
    }

    #[test]
    fn save_and_load_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        let m = model(CellKind::Lstm);
        save_model(&m, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded.params, m.params);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(matches!(model_from_str("nope"), Err(Error::ModelFormat(_))));

        let m = model(CellKind::Rnn);
        let mut text = model_to_string(&m);
        text.push_str("0.5\n"); // one parameter too many
        assert!(matches!(model_from_str(&text), Err(Error::ModelFormat(_))));

        let truncated: String = model_to_string(&m)
            .lines()
            .take(14)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(model_from_str(&truncated).is_err());
    }
}
