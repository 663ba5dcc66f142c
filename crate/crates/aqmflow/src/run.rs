//! Simulation runs and their output files.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use aqmflow_core::metrics::{bound_gap, RunMetrics};
use aqmflow_core::models::{Simulation, TimeSeries};
use aqmflow_core::ModelKind;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::{ExperimentConfig, ModelEntry};
use crate::error::{CliError, ConfigError, Origin, Result};
use crate::output::{write_metrics, write_series};

pub const THREADS_ENV: &str = "AQMFLOW_THREADS";

/// Worker pool sized by `AQMFLOW_THREADS`, or by rayon's default if unset.
pub fn thread_pool() -> Result<ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                return Err(ConfigError::new(
                    Origin::Flag(THREADS_ENV),
                    format!("expected a positive thread count, got `{v}`"),
                )
                .into())
            }
        },
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::io(THREADS_ENV, std::io::Error::other(e)))
}

#[derive(Debug, Clone)]
pub struct ModelRun {
    pub entry: ModelEntry,
    pub series: TimeSeries,
    pub metrics: RunMetrics,
}

/// Runs one model of the experiment.
pub fn simulate_entry(cfg: &ExperimentConfig, entry: &ModelEntry) -> Result<TimeSeries> {
    let context = || format!("{} with {}", entry.label(), cfg.summary());
    Simulation::new(cfg.params, entry.spec(), cfg.aqm, cfg.dt)
        .and_then(|mut sim| sim.run(cfg.duration, &cfg.schedule_for(entry), cfg.output.stride))
        .map_err(|e| CliError::solver(context(), e))
}

/// Queue gap for each model, pairing the i-th Scenario A run with the i-th
/// Scenario B run. Both members of a pair get the same value.
pub fn bound_gaps(kinds: &[ModelKind], series: &[Option<&TimeSeries>]) -> Vec<Option<f64>> {
    let pick = |k: ModelKind| -> Vec<usize> {
        kinds
            .iter()
            .enumerate()
            .filter(|(_, &kind)| kind == k)
            .map(|(i, _)| i)
            .collect()
    };
    let mut gaps = vec![None; kinds.len()];
    for (a, b) in pick(ModelKind::ScenarioA).into_iter().zip(pick(ModelKind::ScenarioB)) {
        if let (Some(sa), Some(sb)) = (series[a], series[b]) {
            let gap = bound_gap(sa, sb);
            gaps[a] = gap;
            gaps[b] = gap;
        }
    }
    gaps
}

/// Runs every model of the experiment, in parallel, in config order.
pub fn run_models(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Vec<ModelRun>> {
    let series: Vec<TimeSeries> = pool.install(|| {
        cfg.models
            .par_iter()
            .map(|m| simulate_entry(cfg, m))
            .collect::<Result<_>>()
    })?;
    let kinds: Vec<ModelKind> = cfg.models.iter().map(|m| m.kind).collect();
    let refs: Vec<Option<&TimeSeries>> = series.iter().map(Some).collect();
    let gaps = bound_gaps(&kinds, &refs);
    Ok(cfg
        .models
        .iter()
        .zip(series)
        .zip(gaps)
        .map(|((entry, series), gap)| {
            let metrics = RunMetrics::from_series(&series, cfg.params.q_ref).with_bound_gap(gap);
            ModelRun {
                entry: entry.clone(),
                series,
                metrics,
            }
        })
        .collect())
}

/// `rho` column value: empty for MGT.
pub fn rho_cell(entry: &ModelEntry) -> String {
    if entry.kind.is_mgt() {
        String::new()
    } else {
        entry
            .rho
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Writes one CSV per model plus `metrics.csv`; returns the paths written.
pub fn write_outputs(dir: &Path, runs: &[ModelRun]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::with_capacity(runs.len() + 1);
    for run in runs {
        let path = dir.join(format!("{}.csv", run.entry.file_stem()));
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        write_series(BufWriter::new(file), &run.series)?;
        written.push(path);
    }
    let rows: Vec<_> = runs
        .iter()
        .map(|r| (r.entry.label(), rho_cell(&r.entry), r.metrics))
        .collect();
    let path = dir.join("metrics.csv");
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    write_metrics(BufWriter::new(file), &rows)?;
    written.push(path);
    Ok(written)
}
