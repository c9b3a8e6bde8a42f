//! CSV emission. Floats are written with 17 significant digits so every value
//! parses back bit-for-bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bench::{AggregateResult, ExperimentResult, RunRecord};
use crate::error::{BenchError, Result};

pub const TRAJECTORY_FILE: &str = "trajectories.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

pub const TRAJECTORY_HEADER: [&str; 8] =
    ["iter", "seed", "optimizer", "energy", "delta_e", "log10_delta_e", "correction_norm", "fidelity"];
pub const AGGREGATE_HEADER: [&str; 7] = [
    "iter",
    "optimizer",
    "mean_energy",
    "mean_delta_e",
    "median_delta_e",
    "mean_log10_delta_e",
    "mean_correction_norm",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct TrajectoryRow {
    pub iter: usize,
    pub seed: usize,
    pub optimizer: String,
    pub energy: f64,
    pub delta_e: f64,
    pub log10_delta_e: f64,
    pub correction_norm: f64,
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct AggregateCsvRow {
    pub iter: usize,
    pub optimizer: String,
    pub mean_energy: f64,
    pub mean_delta_e: f64,
    pub median_delta_e: f64,
    pub mean_log10_delta_e: f64,
    pub mean_correction_norm: f64,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

pub fn write_trajectories(path: &Path, runs: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for run in runs {
        for r in &run.trajectory.records {
            w.write_record([
                r.iter.to_string(),
                run.seed.to_string(),
                run.optimizer.clone(),
                fmt_f64(r.energy),
                fmt_f64(r.delta_e),
                fmt_f64(r.log10_delta_e),
                fmt_f64(r.correction_norm),
                r.fidelity.map(fmt_f64).unwrap_or_default(),
            ])?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn write_aggregates(path: &Path, aggregates: &[AggregateResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for agg in aggregates {
        for r in &agg.rows {
            w.write_record([
                r.iter.to_string(),
                agg.optimizer.clone(),
                fmt_f64(r.mean_energy),
                fmt_f64(r.mean_delta_e),
                fmt_f64(r.median_delta_e),
                fmt_f64(r.mean_log10_delta_e),
                fmt_f64(r.mean_correction_norm),
            ])?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Writes both CSVs into `dir` (created if missing) and returns their paths.
pub fn write_outputs(dir: &Path, result: &ExperimentResult) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let traj = dir.join(TRAJECTORY_FILE);
    let agg = dir.join(AGGREGATE_FILE);
    write_trajectories(&traj, &result.runs)?;
    write_aggregates(&agg, &result.aggregates)?;
    Ok((traj, agg))
}

pub fn read_trajectories(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn read_aggregates(path: &Path) -> Result<Vec<AggregateCsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
