//! One-parameter sweeps over a base experiment.

use std::io::Write;
use std::str::FromStr;

use aqmflow_core::analysis::{operating_point, OperatingPoint};
use aqmflow_core::metrics::RunMetrics;
use aqmflow_core::models::TimeSeries;
use aqmflow_core::ModelKind;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::{ConfigLoader, ExperimentConfig, ModelEntry};
use crate::error::{ConfigError, Origin, Result};
use crate::output::{convergence_cell, opt_sig6, sig6};
use crate::run::{bound_gaps, rho_cell, simulate_entry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    NFlows,
    /// Values in Mb/s.
    Capacity,
    PropDelay,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::NFlows => "n_flows",
            Axis::Capacity => "capacity_mbps",
            Axis::PropDelay => "prop_delay",
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "n_flows" => Ok(Axis::NFlows),
            "capacity" | "capacity_mbps" => Ok(Axis::Capacity),
            "prop_delay" => Ok(Axis::PropDelay),
            _ => Err(format!("unknown axis `{s}` (n_flows, capacity or prop_delay)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Axis value as given on the command line.
    pub value: String,
    /// Model label, empty if the configuration itself failed.
    pub model: String,
    pub rho: String,
    pub op: Option<OperatingPoint>,
    pub metrics: Option<RunMetrics>,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(value: &str, model: String, rho: String, error: String) -> Self {
        SweepRow {
            value: value.to_string(),
            model,
            rho,
            op: None,
            metrics: None,
            error: Some(error),
        }
    }
}

struct Job<'a> {
    cfg: &'a ExperimentConfig,
    entry: &'a ModelEntry,
}

type JobOutput = std::result::Result<(OperatingPoint, Option<TimeSeries>), String>;

fn run_job(job: &Job<'_>, simulate: bool) -> JobOutput {
    let op = operating_point(&job.cfg.params, &job.entry.spec())
        .map_err(|e| format!("operating point: {e}"))?;
    let series = if simulate {
        Some(simulate_entry(job.cfg, job.entry).map_err(|e| e.to_string())?)
    } else {
        None
    };
    Ok((op, series))
}

/// One row per (value, model). A value whose configuration is invalid yields
/// a single error row; failing models yield error rows. Either way the sweep
/// continues. Rows come back in value order, then model order.
pub fn sweep(
    base: &ConfigLoader,
    axis: Axis,
    values: &[String],
    simulate: bool,
    pool: &ThreadPool,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(ConfigError::new(Origin::Flag("--values"), "no values to sweep").into());
    }
    let configs: Vec<std::result::Result<ExperimentConfig, ConfigError>> = values
        .iter()
        .map(|v| base.clone().set(axis.name(), v, "--values")?.build())
        .collect();

    let mut jobs = Vec::new();
    for cfg in configs.iter().flatten() {
        jobs.extend(cfg.models.iter().map(|entry| Job { cfg, entry }));
    }
    let outputs: Vec<JobOutput> = pool.install(|| jobs.par_iter().map(|j| run_job(j, simulate)).collect());

    let mut rows = Vec::with_capacity(outputs.len());
    let mut outputs = outputs.into_iter();
    for (value, cfg) in values.iter().zip(&configs) {
        let cfg = match cfg {
            Ok(cfg) => cfg,
            Err(e) => {
                rows.push(SweepRow::failed(value, String::new(), String::new(), e.to_string()));
                continue;
            }
        };
        let group: Vec<JobOutput> = outputs.by_ref().take(cfg.models.len()).collect();
        let kinds: Vec<ModelKind> = cfg.models.iter().map(|m| m.kind).collect();
        let series: Vec<Option<&TimeSeries>> = group
            .iter()
            .map(|o| o.as_ref().ok().and_then(|(_, s)| s.as_ref()))
            .collect();
        let gaps = bound_gaps(&kinds, &series);
        for ((entry, out), gap) in cfg.models.iter().zip(&group).zip(gaps) {
            rows.push(match out {
                Ok((op, series)) => SweepRow {
                    value: value.clone(),
                    model: entry.label(),
                    rho: rho_cell(entry),
                    op: Some(*op),
                    metrics: series
                        .as_ref()
                        .map(|s| RunMetrics::from_series(s, cfg.params.q_ref).with_bound_gap(gap)),
                    error: None,
                },
                Err(e) => SweepRow::failed(value, entry.label(), rho_cell(entry), e.clone()),
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(out: W, axis: Axis, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        axis.name(),
        "model",
        "rho",
        "w_bar",
        "level",
        "p0",
        "settled_q",
        "settled_p",
        "convergence_time",
        "bound_gap",
        "error",
    ])?;
    for r in rows {
        let (w_bar, level, p0) = match &r.op {
            Some(op) => (sig6(op.w_bar), op.level.label().to_string(), sig6(op.p0)),
            None => Default::default(),
        };
        let (q, p, conv, gap) = match &r.metrics {
            Some(m) => (sig6(m.settled_q), sig6(m.settled_p), convergence_cell(m), opt_sig6(m.bound_gap)),
            None => Default::default(),
        };
        w.write_record([
            r.value.clone(),
            r.model.clone(),
            r.rho.clone(),
            w_bar,
            level,
            p0,
            q,
            p,
            conv,
            gap,
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

