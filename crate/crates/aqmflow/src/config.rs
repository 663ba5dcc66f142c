//! Experiment configuration.
//!
//! The format is flat `key = value` text, one assignment per line, with `#`
//! starting a comment and dotted keys for the AQM and output sections:
//!
//! ```text
//! preset = fig-pi-n500      # optional starting point
//! n_flows = 800
//! models = mgt, scenario-a@2.7921, scenario-b@2.1022
//! aqm.kind = pi
//! schedule = 65:+200, 130:-200
//! ```
//!
//! Values are applied in order: defaults, then the preset, then the file,
//! then command-line overrides. A key may appear only once per file.

use std::collections::HashMap;
use std::path::PathBuf;

use aqmflow_core::aqm::{AqmConfig, PiConfig, RaqConfig, RemConfig};
use aqmflow_core::models::FlowChange;
use aqmflow_core::{mbps_to_pps, ModelKind, ModelSpec, NetworkParams};

use crate::error::{ConfigError, Origin};
use crate::presets;

pub const DEFAULT_DT: f64 = 0.0005;
pub const DEFAULT_DURATION: f64 = 200.0;
/// Default number of integration steps per recorded CSV row.
pub const DEFAULT_STRIDE: usize = 20;
pub const DEFAULT_OUT_DIR: &str = "out";

/// Every accepted key. Aliases share a slot so they cannot both be set.
const KEYS: &[(&str, &str)] = &[
    ("preset", "preset"),
    ("n_flows", "n_flows"),
    ("capacity", "capacity"),
    ("capacity_mbps", "capacity"),
    ("prop_delay", "prop_delay"),
    ("buffer", "buffer"),
    ("q_ref", "q_ref"),
    ("ecn", "ecn"),
    ("mean_pkt_bytes", "mean_pkt_bytes"),
    ("model", "models"),
    ("models", "models"),
    ("rho", "rho"),
    ("aqm.kind", "aqm.kind"),
    ("aqm.T", "aqm.T"),
    ("aqm.a", "aqm.a"),
    ("aqm.b", "aqm.b"),
    ("aqm.gamma", "aqm.gamma"),
    ("aqm.phi", "aqm.phi"),
    ("aqm.alpha", "aqm.alpha"),
    ("aqm.q_kp", "aqm.q_kp"),
    ("aqm.q_ki", "aqm.q_ki"),
    ("aqm.r_kp", "aqm.r_kp"),
    ("aqm.queue_norm", "aqm.queue_norm"),
    ("dt", "dt"),
    ("duration", "duration"),
    ("schedule", "schedule"),
    ("output.dir", "output.dir"),
    ("output.stride", "output.stride"),
    ("measured_p0", "measured_p0"),
];

fn slot(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, s)| *s)
}

/// A model to run, with its `rho` for each segment of the flow schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEntry {
    pub kind: ModelKind,
    /// `rho[0]` applies from the start, `rho[i]` after the i-th flow change.
    /// A single value holds for the whole run.
    pub rho: Vec<f64>,
}

impl ModelEntry {
    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            kind: self.kind,
            rho: self.rho.first().copied().unwrap_or(1.0),
        }
    }

    /// `kind@rho` as written in a config file.
    pub fn label(&self) -> String {
        if self.kind.is_mgt() {
            return kind_name(self.kind).to_string();
        }
        let rhos: Vec<String> = self.rho.iter().map(|r| r.to_string()).collect();
        format!("{}@{}", kind_name(self.kind), rhos.join(";"))
    }

    /// Label usable as a file name.
    pub fn file_stem(&self) -> String {
        self.label().replace('@', "_rho").replace(';', "-")
    }
}

pub fn kind_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::ScenarioA => "scenario-a",
        ModelKind::ScenarioB => "scenario-b",
        ModelKind::MgtTruncated => "mgt",
        ModelKind::MgtUntruncated => "mgt-untruncated",
    }
}

pub fn parse_kind(name: &str) -> Option<ModelKind> {
    Some(match name {
        "scenario-a" | "a" => ModelKind::ScenarioA,
        "scenario-b" | "b" => ModelKind::ScenarioB,
        "mgt" => ModelKind::MgtTruncated,
        "mgt-untruncated" => ModelKind::MgtUntruncated,
        _ => return None,
    })
}

/// Sessions joining or leaving at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowEvent {
    pub at: f64,
    pub delta: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Steps per recorded row.
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Option<&'static str>,
    pub params: NetworkParams,
    pub models: Vec<ModelEntry>,
    pub aqm: AqmConfig,
    pub dt: f64,
    pub duration: f64,
    /// Sorted by time.
    pub schedule: Vec<FlowEvent>,
    pub output: OutputConfig,
    pub measured_p0: Option<f64>,
}

impl ExperimentConfig {
    /// The flow schedule as seen by one model, carrying its `rho` changes.
    pub fn schedule_for(&self, entry: &ModelEntry) -> Vec<FlowChange> {
        self.schedule
            .iter()
            .enumerate()
            .map(|(i, e)| FlowChange {
                at: e.at,
                delta: e.delta,
                rho: if entry.rho.len() > 1 {
                    entry.rho.get(i + 1).copied()
                } else {
                    None
                },
            })
            .collect()
    }

    /// One-line description used when echoing a failing configuration.
    pub fn summary(&self) -> String {
        let p = &self.params;
        format!(
            "N={} C={} pkt/s Tp={} s B={} q_ref={} ecn={} aqm={} T={} dt={}",
            p.n_flows,
            p.capacity,
            p.prop_delay,
            p.buffer,
            p.q_ref,
            if p.ecn_on { "on" } else { "off" },
            self.aqm.name(),
            self.aqm.period(),
            self.dt
        )
    }
}

/// Parses a config file on its own, without overrides.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    ConfigLoader::new(text)?.build()
}

#[derive(Debug, Clone, PartialEq)]
struct Assignment {
    key: String,
    value: String,
    origin: Origin,
}

fn parse_assignments(
    text: &str,
    origin: impl Fn(usize) -> Origin,
) -> Result<Vec<Assignment>, ConfigError> {
    let mut out = Vec::new();
    let mut seen: HashMap<&'static str, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let here = origin(i + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::new(here.clone(), format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let slot = slot(key).ok_or_else(|| ConfigError::new(here.clone(), format!("unknown key `{key}`")))?;
        if value.is_empty() {
            return Err(ConfigError::new(here, format!("`{key}` has no value")));
        }
        if let Some(first) = seen.insert(slot, i + 1) {
            return Err(ConfigError::new(
                here,
                format!("`{key}` already set on line {first}"),
            ));
        }
        out.push(Assignment {
            key: key.to_string(),
            value: value.to_string(),
            origin: here,
        });
    }
    Ok(out)
}

/// Collects a config file, an optional preset and command-line overrides.
#[derive(Debug, Clone)]
pub struct ConfigLoader {
    file: Vec<Assignment>,
    preset: Option<(&'static str, Origin)>,
    overrides: Vec<Assignment>,
}

impl ConfigLoader {
    pub fn new(text: &str) -> Result<Self, ConfigError> {
        let file = parse_assignments(text, Origin::Line)?;
        let mut loader = ConfigLoader {
            file: Vec::new(),
            preset: None,
            overrides: Vec::new(),
        };
        for a in file {
            if a.key == "preset" {
                loader.preset = Some((lookup_preset(&a.value, &a.origin)?, a.origin));
            } else {
                loader.file.push(a);
            }
        }
        Ok(loader)
    }

    /// Replaces the preset named in the file, if any.
    pub fn preset(mut self, name: &str) -> Result<Self, ConfigError> {
        let origin = Origin::Flag("--preset");
        self.preset = Some((lookup_preset(name, &origin)?, origin));
        Ok(self)
    }

    /// Overrides one key, as if appended to the file.
    pub fn set(mut self, key: &str, value: &str, flag: &'static str) -> Result<Self, ConfigError> {
        let origin = Origin::Flag(flag);
        if slot(key).is_none() || key == "preset" {
            return Err(ConfigError::new(origin, format!("unknown key `{key}`")));
        }
        self.overrides.push(Assignment {
            key: key.to_string(),
            value: value.trim().to_string(),
            origin,
        });
        Ok(self)
    }

    pub fn build(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut b = Builder::default();
        if let Some((name, _)) = self.preset {
            let text = presets::text(name).expect("preset names are checked on entry");
            let assignments = parse_assignments(text, |line| Origin::Preset { name, line })?;
            for a in &assignments {
                b.apply(a)?;
            }
        }
        for a in self.file.iter().chain(&self.overrides) {
            b.apply(a)?;
        }
        b.finish(self.preset.as_ref().map(|(n, _)| *n))
    }
}

fn lookup_preset(name: &str, origin: &Origin) -> Result<&'static str, ConfigError> {
    presets::find(name).map(|p| p.name).ok_or_else(|| {
        ConfigError::new(
            origin.clone(),
            format!("unknown preset `{name}` (see `aqmflow presets`)"),
        )
    })
}

#[derive(Debug, Clone, Copy)]
enum Capacity {
    Pps(f64),
    Mbps(f64),
}

#[derive(Debug, Clone)]
struct ModelToken {
    kind: ModelKind,
    rho: Option<Vec<f64>>,
}

#[derive(Debug)]
struct Builder {
    n_flows: u32,
    capacity: Capacity,
    prop_delay: f64,
    buffer: f64,
    q_ref: f64,
    ecn_on: bool,
    mean_pkt_bytes: f64,
    models: Vec<ModelToken>,
    rho: f64,
    aqm_kind: String,
    aqm_fields: Vec<(String, f64)>,
    period: Option<f64>,
    dt: f64,
    duration: f64,
    schedule: Vec<FlowEvent>,
    out_dir: PathBuf,
    stride: usize,
    measured_p0: Option<f64>,
    origins: HashMap<String, Origin>,
}

impl Default for Builder {
    fn default() -> Self {
        let d = NetworkParams::default();
        Builder {
            n_flows: d.n_flows,
            capacity: Capacity::Pps(d.capacity),
            prop_delay: d.prop_delay,
            buffer: d.buffer,
            q_ref: d.q_ref,
            ecn_on: d.ecn_on,
            mean_pkt_bytes: d.mean_pkt_bytes,
            models: all_models(),
            rho: 1.0,
            aqm_kind: "pi".to_string(),
            aqm_fields: Vec::new(),
            period: None,
            dt: DEFAULT_DT,
            duration: DEFAULT_DURATION,
            schedule: Vec::new(),
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
            stride: DEFAULT_STRIDE,
            measured_p0: None,
            origins: HashMap::new(),
        }
    }
}

fn all_models() -> Vec<ModelToken> {
    [ModelKind::MgtTruncated, ModelKind::ScenarioA, ModelKind::ScenarioB]
        .into_iter()
        .map(|kind| ModelToken { kind, rho: None })
        .collect()
}

fn number(a: &Assignment) -> Result<f64, ConfigError> {
    match a.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ConfigError::new(
            a.origin.clone(),
            format!("malformed number `{}` for `{}`", a.value, a.key),
        )),
    }
}

fn count<T: std::str::FromStr>(a: &Assignment) -> Result<T, ConfigError> {
    a.value.parse::<T>().map_err(|_| {
        ConfigError::new(
            a.origin.clone(),
            format!("malformed integer `{}` for `{}`", a.value, a.key),
        )
    })
}

fn parse_models(a: &Assignment) -> Result<Vec<ModelToken>, ConfigError> {
    let err = |msg: String| ConfigError::new(a.origin.clone(), msg);
    let mut out = Vec::new();
    for item in a.value.split(',').map(str::trim) {
        if item == "all" {
            out.extend(all_models());
            continue;
        }
        let (name, rho) = match item.split_once('@') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (item, None),
        };
        let kind = parse_kind(name).ok_or_else(|| err(format!("unknown model `{name}`")))?;
        let rho = match rho {
            None => None,
            Some(_) if kind.is_mgt() => return Err(err(format!("`{name}` takes no rho"))),
            Some(list) => Some(
                list.split(';')
                    .map(|r| {
                        r.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| err(format!("malformed rho `{}` in `{item}`", r.trim())))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        out.push(ModelToken { kind, rho });
    }
    Ok(out)
}

/// `at:+delta` items separated by commas, e.g. `65:+200, 130:-200`.
fn parse_schedule(a: &Assignment) -> Result<Vec<FlowEvent>, ConfigError> {
    if a.value == "none" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for item in a.value.split(',').map(str::trim) {
        let bad = || {
            ConfigError::new(
                a.origin.clone(),
                format!("malformed schedule entry `{item}`, expected `time:+count`"),
            )
        };
        let (at, delta) = item.split_once(':').ok_or_else(bad)?;
        let at: f64 = at.trim().parse().map_err(|_| bad())?;
        let delta = delta.trim();
        let delta: i64 = delta.strip_prefix('+').unwrap_or(delta).parse().map_err(|_| bad())?;
        if !at.is_finite() || delta == 0 {
            return Err(bad());
        }
        if out.last().is_some_and(|e: &FlowEvent| e.at > at) {
            return Err(ConfigError::new(
                a.origin.clone(),
                "schedule entries must be in time order",
            ));
        }
        out.push(FlowEvent { at, delta });
    }
    Ok(out)
}

impl Builder {
    fn apply(&mut self, a: &Assignment) -> Result<(), ConfigError> {
        match a.key.as_str() {
            "n_flows" => self.n_flows = count(a)?,
            "capacity" => self.capacity = Capacity::Pps(number(a)?),
            "capacity_mbps" => self.capacity = Capacity::Mbps(number(a)?),
            "prop_delay" => self.prop_delay = number(a)?,
            "buffer" => self.buffer = number(a)?,
            "q_ref" => self.q_ref = number(a)?,
            "ecn" => {
                self.ecn_on = match a.value.as_str() {
                    "on" | "true" | "yes" => true,
                    "off" | "false" | "no" => false,
                    v => {
                        return Err(ConfigError::new(
                            a.origin.clone(),
                            format!("`ecn` must be on or off, got `{v}`"),
                        ))
                    }
                }
            }
            "mean_pkt_bytes" => self.mean_pkt_bytes = number(a)?,
            "model" | "models" => self.models = parse_models(a)?,
            "rho" => self.rho = number(a)?,
            "aqm.kind" => match a.value.as_str() {
                "pi" | "rem" | "raq" => self.aqm_kind = a.value.clone(),
                v => {
                    return Err(ConfigError::new(
                        a.origin.clone(),
                        format!("unknown aqm.kind `{v}` (pi, rem or raq)"),
                    ))
                }
            },
            "aqm.T" => self.period = Some(number(a)?),
            k if k.starts_with("aqm.") => {
                let v = number(a)?;
                self.aqm_fields.retain(|(name, _)| name != k);
                self.aqm_fields.push((k.to_string(), v));
            }
            "dt" => self.dt = number(a)?,
            "duration" => self.duration = number(a)?,
            "schedule" => self.schedule = parse_schedule(a)?,
            "output.dir" => self.out_dir = PathBuf::from(&a.value),
            "output.stride" => self.stride = count(a)?,
            "measured_p0" => self.measured_p0 = Some(number(a)?),
            other => unreachable!("key `{other}` accepted but not handled"),
        }
        let slot = slot(&a.key).unwrap_or("");
        self.origins.insert(slot.to_string(), a.origin.clone());
        Ok(())
    }

    fn origin(&self, slot: &str) -> Origin {
        self.origins.get(slot).cloned().unwrap_or(Origin::Whole)
    }

    fn fail(&self, slot: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::new(self.origin(slot), message)
    }

    fn aqm(&self) -> Result<AqmConfig, ConfigError> {
        let mut aqm = match self.aqm_kind.as_str() {
            "rem" => AqmConfig::Rem(RemConfig::default()),
            "raq" => AqmConfig::Raq(RaqConfig::default()),
            _ => AqmConfig::Pi(PiConfig::default()),
        };
        for (key, v) in &self.aqm_fields {
            let v = *v;
            if let (AqmConfig::Raq(c), "aqm.queue_norm") = (&mut aqm, key.as_str()) {
                c.queue_norm = Some(v);
                continue;
            }
            let field = match (&mut aqm, key.as_str()) {
                (AqmConfig::Pi(c), "aqm.a") => &mut c.a,
                (AqmConfig::Pi(c), "aqm.b") => &mut c.b,
                (AqmConfig::Rem(c), "aqm.gamma") => &mut c.gamma,
                (AqmConfig::Rem(c), "aqm.phi") => &mut c.phi,
                (AqmConfig::Rem(c), "aqm.alpha") => &mut c.alpha,
                (AqmConfig::Raq(c), "aqm.q_kp") => &mut c.q_kp,
                (AqmConfig::Raq(c), "aqm.q_ki") => &mut c.q_ki,
                (AqmConfig::Raq(c), "aqm.r_kp") => &mut c.r_kp,
                _ => {
                    return Err(self.fail(
                        key,
                        format!("`{key}` does not apply to aqm.kind = {}", self.aqm_kind),
                    ))
                }
            };
            *field = v;
        }
        if let Some(t) = self.period {
            aqm = aqm.with_period(t);
        }
        aqm.validate().map_err(|e| match e {
            aqmflow_core::Error::InvalidParam { name, .. } => self.fail(name, e.to_string()),
            e => ConfigError::new(Origin::Whole, e.to_string()),
        })?;
        Ok(aqm)
    }

    fn finish(self, preset: Option<&'static str>) -> Result<ExperimentConfig, ConfigError> {
        let capacity = match self.capacity {
            Capacity::Pps(c) => c,
            Capacity::Mbps(m) => mbps_to_pps(m, self.mean_pkt_bytes),
        };
        if !(self.mean_pkt_bytes > 0.0) {
            return Err(self.fail("mean_pkt_bytes", "`mean_pkt_bytes` must be positive"));
        }
        let params = NetworkParams {
            n_flows: self.n_flows,
            capacity,
            prop_delay: self.prop_delay,
            buffer: self.buffer,
            q_ref: self.q_ref,
            ecn_on: self.ecn_on,
            mean_pkt_bytes: self.mean_pkt_bytes,
        };
        params.validate().map_err(|e| match e {
            aqmflow_core::Error::InvalidParam { name, .. } => self.fail(name, e.to_string()),
            e => ConfigError::new(Origin::Whole, e.to_string()),
        })?;

        let aqm = self.aqm()?;
        if !(self.dt > 0.0) {
            return Err(self.fail("dt", "`dt` must be positive"));
        }
        if self.dt > aqm.period() {
            return Err(self.fail(
                "dt",
                format!(
                    "dt = {} exceeds the AQM sampling period T = {}",
                    self.dt,
                    aqm.period()
                ),
            ));
        }
        if !(self.duration > 0.0) {
            return Err(self.fail("duration", "`duration` must be positive"));
        }
        if self.stride == 0 {
            return Err(self.fail("output.stride", "`output.stride` must be at least 1"));
        }
        if let Some(p) = self.measured_p0 {
            if !(p > 0.0 && p < 1.0) {
                return Err(self.fail("measured_p0", "`measured_p0` must lie in (0, 1)"));
            }
        }

        // Population after each schedule event.
        let mut populations = vec![i64::from(self.n_flows)];
        for e in &self.schedule {
            if !(0.0..=self.duration).contains(&e.at) {
                return Err(self.fail(
                    "schedule",
                    format!("change at {} s lies outside [0, {}]", e.at, self.duration),
                ));
            }
            let n = populations[populations.len() - 1] + e.delta;
            if n < 1 || n > i64::from(u32::MAX) {
                return Err(self.fail("schedule", format!("flow count becomes {n} at {} s", e.at)));
            }
            populations.push(n);
        }

        let mut models = Vec::with_capacity(self.models.len());
        for token in &self.models {
            let rho = if token.kind.is_mgt() {
                vec![1.0]
            } else {
                token.rho.clone().unwrap_or_else(|| vec![self.rho])
            };
            let entry = ModelEntry {
                kind: token.kind,
                rho,
            };
            if !token.kind.is_mgt() {
                if entry.rho.len() != 1 && entry.rho.len() != populations.len() {
                    return Err(self.fail(
                        "models",
                        format!(
                            "`{}` lists {} rho values; the schedule needs 1 or {}",
                            entry.label(),
                            entry.rho.len(),
                            populations.len()
                        ),
                    ));
                }
                for (i, &n) in populations.iter().enumerate() {
                    let rho = entry.rho.get(i).copied().unwrap_or(entry.rho[0]);
                    if !(rho >= 1.0 && rho <= n as f64) {
                        let slot = if token.rho.is_some() { "models" } else { "rho" };
                        return Err(self.fail(
                            slot,
                            format!("rho = {rho} for `{}` must lie in [1, N = {n}]", entry.label()),
                        ));
                    }
                }
            }
            if models.iter().any(|m: &ModelEntry| m.label() == entry.label()) {
                return Err(self.fail("models", format!("`{}` is listed twice", entry.label())));
            }
            models.push(entry);
        }
        if models.is_empty() {
            return Err(self.fail("models", "no model selected"));
        }

        Ok(ExperimentConfig {
            preset,
            params,
            models,
            aqm,
            dt: self.dt,
            duration: self.duration,
            schedule: self.schedule,
            output: OutputConfig {
                dir: self.out_dir,
                stride: self.stride,
            },
            measured_p0: self.measured_p0,
        })
    }
}
