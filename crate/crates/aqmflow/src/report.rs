//! Operating-point and stability reports.

use std::fmt::Write as _;
use std::io::Write;

use aqmflow_core::analysis::{classify_congestion, operating_point, rho_from_p0, CongestionLevel, OperatingPoint};
use aqmflow_core::aqm::AqmConfig;
use aqmflow_core::stability::{analyze, PiGains, StabilityReport};
use aqmflow_core::{rtt, ModelKind, ModelSpec, Scenario};

use crate::config::{kind_name, ExperimentConfig};
use crate::error::{CliError, ConfigError, Origin, Result};
use crate::output::{sig6, text_table};

#[derive(Debug, Clone, PartialEq)]
pub struct OpRow {
    pub model: ModelSpec,
    pub op: OperatingPoint,
}

/// `rho` values that reproduce a measured marking probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub p0: f64,
    pub rho_a: f64,
    pub rho_b: f64,
    pub w_bar: f64,
    pub level: CongestionLevel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub scenario: Scenario,
    pub n_flows: u32,
    pub rho: f64,
    pub p0: f64,
    pub report: StabilityReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpReport {
    pub rows: Vec<OpRow>,
    pub inversion: Option<Inversion>,
    pub stability: Vec<StabilityRow>,
}

fn solver(cfg: &ExperimentConfig, what: &str) -> impl Fn(aqmflow_core::Error) -> CliError {
    let context = format!("{what} with {}", cfg.summary());
    move |e| CliError::solver(context.clone(), e)
}

/// The MGT baseline and both scenarios at `rho = 1`, followed by every
/// configured scenario model with a different `rho`.
fn report_models(cfg: &ExperimentConfig) -> Vec<ModelSpec> {
    let mut models = vec![
        ModelSpec::mgt(),
        ModelSpec::scenario_a(1.0),
        ModelSpec::scenario_b(1.0),
    ];
    for entry in &cfg.models {
        let spec = entry.spec();
        if !spec.kind.is_mgt() && !models.contains(&spec) {
            models.push(spec);
        }
    }
    models
}

pub fn invert(cfg: &ExperimentConfig, p0: f64) -> Result<Inversion> {
    let params = &cfg.params;
    let err = solver(cfg, "rho inversion");
    let rho_a = rho_from_p0(p0, params, Scenario::A, params.ecn_on).map_err(&err)?;
    let rho_b = rho_from_p0(p0, params, Scenario::B, params.ecn_on).map_err(&err)?;
    let mut ws0 = rtt(params.q_ref, params) * params.capacity;
    if !params.ecn_on {
        ws0 /= 1.0 - p0;
    }
    let w_bar = ws0 / params.n();
    Ok(Inversion {
        p0,
        rho_a,
        rho_b,
        w_bar,
        level: classify_congestion(w_bar),
    })
}

fn pi_gains(cfg: &ExperimentConfig) -> Result<PiGains> {
    match cfg.aqm {
        AqmConfig::Pi(c) => Ok(PiGains::from_discrete(c.a, c.b)),
        other => Err(ConfigError::new(
            Origin::Whole,
            format!("stability analysis covers the PI controller only, not {}", other.name()),
        )
        .into()),
    }
}

/// Routh analysis for each scenario: at the `rho` matching the measured
/// `p0` when one is configured, otherwise at each configured scenario model.
pub fn stability_rows(cfg: &ExperimentConfig) -> Result<Vec<StabilityRow>> {
    if !cfg.params.ecn_on {
        return Err(ConfigError::new(
            Origin::Whole,
            "stability analysis needs ecn = on (the drop-based loop is not linearised)",
        )
        .into());
    }
    let gains = pi_gains(cfg)?;
    let mut points: Vec<(Scenario, f64, Option<f64>)> = Vec::new();
    if let Some(p0) = cfg.measured_p0 {
        let inv = invert(cfg, p0)?;
        points.push((Scenario::A, inv.rho_a, Some(p0)));
        points.push((Scenario::B, inv.rho_b, Some(p0)));
    } else {
        for entry in &cfg.models {
            if let Some(s) = entry.kind.scenario() {
                let rho = entry.spec().rho;
                if !points.iter().any(|&(s2, r2, _)| s2 == s && r2 == rho) {
                    points.push((s, rho, None));
                }
            }
        }
    }
    if points.is_empty() {
        return Err(ConfigError::new(
            Origin::Whole,
            "no scenario model to analyse; add one to `models` or set `measured_p0`",
        )
        .into());
    }
    let err = solver(cfg, "stability analysis");
    points
        .into_iter()
        .map(|(scenario, rho, p0)| {
            let mut op = operating_point(&cfg.params, &ModelSpec::scenario(scenario, rho)).map_err(&err)?;
            if let Some(p0) = p0 {
                op.p0 = p0;
            }
            let (_, report) = analyze(&op, rho, &cfg.params, scenario, gains).map_err(&err)?;
            Ok(StabilityRow {
                scenario,
                n_flows: cfg.params.n_flows,
                rho,
                p0: op.p0,
                report,
            })
        })
        .collect()
}

pub fn op_report(cfg: &ExperimentConfig) -> Result<OpReport> {
    let err = solver(cfg, "operating point");
    let rows = report_models(cfg)
        .into_iter()
        .map(|model| {
            operating_point(&cfg.params, &model)
                .map(|op| OpRow { model, op })
                .map_err(&err)
        })
        .collect::<Result<Vec<_>>>()?;
    let inversion = cfg.measured_p0.map(|p0| invert(cfg, p0)).transpose()?;
    let stability = if inversion.is_some() && cfg.params.ecn_on && matches!(cfg.aqm, AqmConfig::Pi(_)) {
        stability_rows(cfg)?
    } else {
        Vec::new()
    };
    Ok(OpReport {
        rows,
        inversion,
        stability,
    })
}

fn model_label(m: &ModelSpec) -> String {
    if m.kind.is_mgt() {
        kind_name(m.kind).to_string()
    } else {
        format!("{}@{}", kind_name(m.kind), m.rho)
    }
}

fn scenario_name(s: Scenario) -> &'static str {
    kind_name(ModelKind::from(s))
}

pub fn render_op(cfg: &ExperimentConfig, report: &OpReport) -> String {
    let p = &cfg.params;
    let r0 = rtt(p.q_ref, p);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "network: N = {}, C = {} pkt/s, Tp = {} s, B = {}, q_ref = {}, ECN {}",
        p.n_flows,
        sig6(p.capacity),
        p.prop_delay,
        p.buffer,
        p.q_ref,
        if p.ecn_on { "on" } else { "off" }
    );
    let _ = writeln!(out, "R0 = {} s, C*R0 = {} packets\n", sig6(r0), sig6(r0 * p.capacity));
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let note = if r.op.truncation_required {
                "> 1, truncation required"
            } else {
                ""
            };
            vec![
                model_label(&r.model),
                sig6(r.op.p0),
                sig6(r.op.ws0),
                sig6(r.op.w_bar),
                r.op.level.label().to_string(),
                note.to_string(),
            ]
        })
        .collect();
    out.push_str(&text_table(&["model", "p0", "ws0", "w_bar", "level", "note"], &rows));
    if let Some(inv) = &report.inversion {
        let _ = writeln!(
            out,
            "\nmeasured p0 = {}: rho_B = {:.4}, rho_A = {:.4}, w_bar = {:.4} ({})",
            inv.p0,
            inv.rho_b,
            inv.rho_a,
            inv.w_bar,
            inv.level.label()
        );
    }
    if !report.stability.is_empty() {
        out.push('\n');
        out.push_str(&render_stability(&report.stability));
    }
    out
}

const STABILITY_HEADER: [&str; 11] = [
    "scenario", "n_flows", "rho", "p0", "alpha1", "alpha2", "alpha3", "alpha4", "beta1", "beta2", "stable",
];

fn stability_cells(r: &StabilityRow) -> Vec<String> {
    let a = r.report.alpha;
    vec![
        scenario_name(r.scenario).to_string(),
        r.n_flows.to_string(),
        sig6(r.rho),
        sig6(r.p0),
        sig6(a[0]),
        sig6(a[1]),
        sig6(a[2]),
        sig6(a[3]),
        sig6(r.report.beta1),
        sig6(r.report.beta2),
        if r.report.stable { "stable" } else { "unstable" }.to_string(),
    ]
}

pub fn render_stability(rows: &[StabilityRow]) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(stability_cells).collect();
    text_table(&STABILITY_HEADER, &cells)
}

pub fn write_stability_csv<W: Write>(out: W, rows: &[StabilityRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STABILITY_HEADER)?;
    for r in rows {
        w.write_record(stability_cells(r))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
