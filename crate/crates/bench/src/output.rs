//! Plot-ready files.
//!
//! * `aggregate.csv`: `queries,mean,std,n_seeds`
//! * `runs/seed-<seed>.jsonl`: raw trajectory of one seed
//! * `summary.json`: final statistics, failures and invariant violations
//!
//! Grid studies write one such directory per `(m, k)` under `m<m>-k<k>/` plus a
//! `grid.csv`; noise sweeps write `sigma-<sigma>/` plus a `noise.csv`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use rankgrad::optimizer::{write_trajectory, TrajectoryRecord};
use rankgrad::variance::BoundCheck;
use serde::Serialize;

use crate::aggregate::AggregateResult;
use crate::error::Result;
use crate::experiment::{ExperimentOutcome, SeedFailure, Violation};
use crate::grid::GridStudy;
use crate::noise::NoiseLevel;

#[derive(Serialize)]
struct Summary<'a> {
    name: &'a str,
    algorithm: String,
    function: String,
    dim: usize,
    seeds: Vec<u64>,
    final_queries: u64,
    final_mean: f64,
    final_std: f64,
    failures: &'a [SeedFailure],
    violations: &'a [Violation],
}

pub fn write_aggregate_csv(path: &Path, agg: &AggregateResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in &agg.points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_outcome(dir: &Path, outcome: &ExperimentOutcome) -> Result<()> {
    fs::create_dir_all(dir.join("runs"))?;
    write_aggregate_csv(&dir.join("aggregate.csv"), &outcome.aggregate)?;
    for run in &outcome.runs {
        let records: Vec<TrajectoryRecord> =
            run.trajectory.records.iter().map(Into::into).collect();
        let file = File::create(dir.join("runs").join(format!("seed-{}.jsonl", run.seed)))?;
        write_trajectory(BufWriter::new(file), &records)?;
    }
    let last = outcome.aggregate.last();
    let summary = Summary {
        name: &outcome.spec.name,
        algorithm: outcome.spec.algorithm.to_string(),
        function: outcome.spec.function.to_string(),
        dim: outcome.spec.dim,
        seeds: outcome.runs.iter().map(|r| r.seed).collect(),
        final_queries: last.queries,
        final_mean: last.mean,
        final_std: last.std,
        failures: &outcome.failures,
        violations: &outcome.violations,
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(dir.join("summary.json"), text)?;
    Ok(())
}

#[derive(Serialize)]
struct GridLine {
    m: usize,
    k: usize,
    predicted_variance: f64,
    queries: u64,
    mean: f64,
    std: f64,
    n_seeds: usize,
}

pub fn write_grid(dir: &Path, study: &GridStudy) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("grid.csv"))?;
    for row in &study.rows {
        write_outcome(&dir.join(format!("m{}-k{}", row.m, row.k)), &row.outcome)?;
        for p in &row.outcome.aggregate.points {
            w.serialize(GridLine {
                m: row.m,
                k: row.k,
                predicted_variance: row.predicted_variance,
                queries: p.queries,
                mean: p.mean,
                std: p.std,
                n_seeds: p.n_seeds,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct NoiseLine {
    sigma: f64,
    queries: u64,
    mean: f64,
    std: f64,
    n_seeds: usize,
}

pub fn write_noise(dir: &Path, levels: &[NoiseLevel]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("noise.csv"))?;
    for level in levels {
        write_outcome(&dir.join(format!("sigma-{}", level.sigma)), &level.outcome)?;
        for p in &level.outcome.aggregate.points {
            w.serialize(NoiseLine {
                sigma: level.sigma,
                queries: p.queries,
                mean: p.mean,
                std: p.std,
                n_seeds: p.n_seeds,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_checks(dir: &Path, checks: &[BoundCheck]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("variance.csv"))?;
    for c in checks {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}
