//! `results.csv`, `trace.csv` and `manifest.json` writers.
//!
//! The CSV files hold only deterministic quantities, so a rerun with the same
//! configuration and seeds reproduces them byte for byte. Wall times live in
//! the manifest.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::sweep::{RowStatus, SweepResult, SweepRow, SweepSpec};
use crate::error::{Error, Result};

pub const RESULTS_FILE: &str = "results.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn write_results(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::output(path, e))?;
    write_results_to(file, rows).map_err(|e| Error::output(path, e))
}

/// Writes the `results.csv` layout, header included, to any sink.
pub fn write_results_to<W: Write>(sink: W, rows: &[SweepRow]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(sink);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TraceRecord {
    run_id: usize,
    ao_iter: usize,
    sum_rate_bits: f64,
}

pub fn write_trace(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::output(path, e))?;
    // Header even when every row failed.
    w.write_record(["run_id", "ao_iter", "sum_rate_bits"])
        .map_err(|e| Error::output(path, e))?;
    for row in rows {
        for (ao_iter, &v) in row.trace.iter().enumerate() {
            w.serialize(TraceRecord {
                run_id: row.run_id,
                ao_iter,
                sum_rate_bits: v,
            })
            .map_err(|e| Error::output(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::output(path, e))
}

#[derive(Debug, Serialize)]
pub struct ManifestRow {
    pub run_id: usize,
    pub status: RowStatus,
    pub message: Option<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub version: String,
    pub parameter: String,
    pub values: Vec<String>,
    pub seeds: Vec<u64>,
    pub protocols: Vec<String>,
    pub algorithms: Vec<String>,
    pub config: serde_json::Value,
    pub n_rows: usize,
    pub n_ok: usize,
    pub total_wall_time_s: f64,
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn new(spec: &SweepSpec, result: &SweepResult, config: serde_json::Value) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            parameter: spec.axis.key().to_string(),
            values: spec.axis.labels(),
            seeds: spec.seeds.clone(),
            protocols: spec.protocols.iter().map(|p| p.to_string()).collect(),
            algorithms: spec.algorithms.iter().map(|a| a.to_string()).collect(),
            config,
            n_rows: result.rows.len(),
            n_ok: result.n_ok(),
            total_wall_time_s: result.wall_time_s,
            rows: result
                .rows
                .iter()
                .map(|r| ManifestRow {
                    run_id: r.run_id,
                    status: r.status,
                    message: r.message.clone(),
                    wall_time_s: r.wall_time_s,
                })
                .collect(),
        }
    }
}

/// Writes all three files into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, spec: &SweepSpec, result: &SweepResult, config: serde_json::Value) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::output(dir, e))?;
    write_results(&dir.join(RESULTS_FILE), &result.rows)?;
    write_trace(&dir.join(TRACE_FILE), &result.rows)?;
    let path = dir.join(MANIFEST_FILE);
    let manifest = Manifest::new(spec, result, config);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::output(&path, e))?;
    fs::write(&path, text + "\n").map_err(|e| Error::output(&path, e))
}
