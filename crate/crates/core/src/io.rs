// SPDX-License-Identifier: Apache-2.0

//! Files: environments as JSON, profiles and report ledgers as CSV.
//!
//! Every artifact carries the config that produced it: a `"config"` key in
//! JSON, `# config: ...` comment lines at the top of CSV files.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::env::{Environment, Grid};
use crate::error::{Error, Result};
use crate::landscape::{DifferenceProfile, TwoWedgeResult};
use crate::mc::TestReport;

#[derive(Serialize, Deserialize)]
struct EnvFile {
    grid: Vec<f64>,
    lines: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<Value>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses `{"grid": [...], "lines": [[...], ...]}`; any other keys are ignored.
pub fn environment_from_json(text: &str) -> Result<Environment<f64>> {
    let file: EnvFile = serde_json::from_str(text).map_err(parse_error)?;
    let grid = Grid::new(file.grid).map_err(|e| Error::Validation(e.to_string()))?;
    Environment::new(grid, file.lines).map_err(|e| Error::Validation(e.to_string()))
}

pub fn environment_to_json(env: &Environment<f64>, config: Option<&Value>) -> String {
    let file = EnvFile {
        grid: env.grid().points().to_vec(),
        lines: env.lines().to_vec(),
        config: config.cloned(),
    };
    serde_json::to_string(&file).expect("plain numbers serialize")
}

pub fn load_environment(path: impl AsRef<Path>) -> Result<Environment<f64>> {
    environment_from_json(&std::fs::read_to_string(path)?)
}

/// Writes `env` so that loading it back gives bitwise-equal values.
pub fn save_environment(env: &Environment<f64>, path: impl AsRef<Path>, config: Option<&Value>) -> Result<()> {
    std::fs::write(path, environment_to_json(env, config))?;
    Ok(())
}

fn config_header(w: &mut impl Write, config: &Value) -> Result<()> {
    writeln!(w, "# config: {config}")?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Columns `y, A, g1, g2`; the `g` columns are empty when not computed.
pub fn write_profile_csv(profile: &DifferenceProfile<f64>, path: impl AsRef<Path>, config: &Value) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    config_header(&mut out, config)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["y", "A", "g1", "g2"]).map_err(csv_error)?;
    for (c, (&y, &a)) in profile.a.grid().points().iter().zip(profile.a.values()).enumerate() {
        let (g1, g2) = match &profile.g {
            Some((g1, g2)) => (g1[c].to_string(), g2[c].to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([y.to_string(), a.to_string(), g1, g2]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `start, end`: the maximal open intervals of increase.
pub fn write_support_csv(profile: &DifferenceProfile<f64>, path: impl AsRef<Path>, config: &Value) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    config_header(&mut out, config)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["start", "end"]).map_err(csv_error)?;
    for &(a, b) in &profile.support {
        w.write_record([a.to_string(), b.to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `y, M1, M2, H`, with `tau` in a comment line.
pub fn write_two_wedge_csv(r: &TwoWedgeResult<f64>, path: impl AsRef<Path>, config: &Value) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    config_header(&mut out, config)?;
    writeln!(out, "# tau: {} crossed: {}", r.tau, r.crossed)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["y", "M1", "M2", "H"]).map_err(csv_error)?;
    for (c, &y) in r.grid.points().iter().enumerate() {
        w.write_record([y, r.m1[c], r.m2[c], r.h[c]].map(|v| v.to_string())).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-tripping form, with an exponent for tiny values.
fn number(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
}

pub const LEDGER_COLUMNS: [&str; 7] = ["name", "statistic", "threshold", "pass", "N", "seed", "runtime"];

/// Appends reports to a CSV ledger, writing the config and column header
/// when the file is new. Seeds are written as `root:stream`.
pub fn append_ledger(reports: &[TestReport], path: impl AsRef<Path>, config: &Value) -> Result<()> {
    let path = path.as_ref();
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let mut out = BufWriter::new(OpenOptions::new().create(true).append(true).open(path)?);
    if fresh {
        config_header(&mut out, config)?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if fresh {
        w.write_record(LEDGER_COLUMNS).map_err(csv_error)?;
    }
    for r in reports {
        w.write_record([
            r.name.clone(),
            number(r.statistic),
            number(r.threshold),
            r.pass.to_string(),
            r.sample_size.to_string(),
            format!("{}:{}", r.seed.root, r.seed.stream),
            format!("{:.3}", r.runtime_seconds),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
