use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::ensemble::EnsembleResult;
use super::{io_err, HarnessError, Result};
use crate::seeding::{GENERATOR_NAME, STREAM_RULE};

/// Contents of `meta.json`. The timestamp lives only here so every other
/// output is a pure function of the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub command: String,
    pub config: serde_json::Value,
    pub master_seed: u64,
    pub generator: String,
    pub stream_rule: String,
    pub version: String,
    pub created_unix: u64,
}

impl RunMeta {
    pub fn new(command: &str, config: serde_json::Value, master_seed: u64) -> Self {
        RunMeta {
            command: command.to_string(),
            config,
            master_seed,
            generator: GENERATOR_NAME.to_string(),
            stream_rule: STREAM_RULE.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_meta(dir: &Path, meta: &RunMeta) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(&dir.join("meta.json"), meta)
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn write_curves(path: &Path, r: &EnsembleResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["t", "request_id", "fraction"]).map_err(csv_err(path))?;
    let fractions = r.fractions();
    for (c, t) in r.checkpoints.iter().enumerate() {
        for (id, row) in fractions.iter().enumerate() {
            w.write_record([t.to_string(), id.to_string(), row[c].to_string()])
                .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

fn write_martingale(path: &Path, r: &EnsembleResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record([
        "t",
        "node",
        "A",
        "F",
        "A_over_sqrt_F",
        "mean_x",
        "std_x",
        "min_x",
        "max_x",
        "mean_l2",
    ])
    .map_err(csv_err(path))?;
    for s in &r.x_stats {
        let np = r
            .normalizer
            .iter()
            .find(|p| p.t == s.t)
            .ok_or_else(|| HarnessError::Config(format!("no normalizer point for t = {}", s.t)))?;
        w.write_record([
            s.t.to_string(),
            s.node.to_string(),
            np.a.to_string(),
            np.big_f.to_string(),
            np.ratio.to_string(),
            s.mean.to_string(),
            s.std.to_string(),
            s.min.to_string(),
            s.max.to_string(),
            s.mean_l2.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `result.json`, `curves.csv` and `martingale.csv` under `dir`.
pub fn write_ensemble(dir: &Path, result: &EnsembleResult) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(&dir.join("result.json"), result)?;
    write_curves(&dir.join("curves.csv"), result)?;
    write_martingale(&dir.join("martingale.csv"), result)
}
