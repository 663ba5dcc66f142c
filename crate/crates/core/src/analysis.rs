//! Operating points of the fluid models and the quantities derived from them.
//!
//! At the operating point the queue sits at the AQM target `q0 = q_ref`, so
//! `R0 = T_p + q0 / C`. Queue balance fixes the aggregate window:
//! `W_s0 = R0 C` with ECN, `W_s0 = R0 C / (1 - p0)` when marks are drops.
//! Window balance then gives `p0`:
//!
//! | model      | `p0`                          |
//! |------------|-------------------------------|
//! | Scenario A | `2N / (2N + rho W_s0)`        |
//! | Scenario B | `2N^2 / (2N^2 + rho W_s0^2)`  |
//! | MGT        | `2N^2 / (R0 C)^2`             |
//!
//! Without ECN the Scenario equations are coupled through `W_s0(p0)`; they
//! are solved by bisection on `p0`.

use crate::network::{rtt, ModelKind, ModelSpec, NetworkParams, Scenario};
use crate::{Error, Result};

/// Half-width of the band around `w = 1` and `w = 2` reported as a
/// boundary congestion level.
pub const BOUNDARY_BAND: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CongestionLevel {
    Mild,
    Moderate,
    Severe,
    MildModerate,
    ModerateSevere,
}

impl CongestionLevel {
    pub fn label(self) -> &'static str {
        match self {
            CongestionLevel::Mild => "Mild",
            CongestionLevel::Moderate => "Moderate",
            CongestionLevel::Severe => "Severe",
            CongestionLevel::MildModerate => "Mild/Moderate",
            CongestionLevel::ModerateSevere => "Moderate/Severe",
        }
    }
}

impl core::fmt::Display for CongestionLevel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.label())
    }
}

/// Classifies the mean per-session window `w_bar = W_s0 / N`.
pub fn classify_congestion(w_bar: f64) -> CongestionLevel {
    if (w_bar - 2.0).abs() <= BOUNDARY_BAND {
        CongestionLevel::MildModerate
    } else if (w_bar - 1.0).abs() <= BOUNDARY_BAND {
        CongestionLevel::ModerateSevere
    } else if w_bar > 2.0 {
        CongestionLevel::Mild
    } else if w_bar >= 1.0 {
        CongestionLevel::Moderate
    } else {
        CongestionLevel::Severe
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub ws0: f64,
    pub q0: f64,
    pub p0: f64,
    pub r0: f64,
    /// Mean window per session.
    pub w_bar: f64,
    pub level: CongestionLevel,
    /// Set when the MGT probability exceeds 1 and has to be truncated.
    pub truncation_required: bool,
}

impl OperatingPoint {
    fn new(params: &NetworkParams, ws0: f64, p0: f64) -> Self {
        let w_bar = ws0 / params.n();
        OperatingPoint {
            ws0,
            q0: params.q_ref,
            p0,
            r0: rtt(params.q_ref, params),
            w_bar,
            level: classify_congestion(w_bar),
            truncation_required: p0 > 1.0,
        }
    }
}

/// Scenario `p0` for a given aggregate window.
fn scenario_p0(scenario: Scenario, n: f64, ws0: f64, rho: f64) -> f64 {
    match scenario {
        Scenario::A => 2.0 * n / (2.0 * n + rho * ws0),
        Scenario::B => 2.0 * n * n / (2.0 * n * n + rho * ws0 * ws0),
    }
}

/// Operating point of `model` at the AQM target queue.
///
/// With ECN off the scenario models go through [`operating_point_ecn_off`].
/// MGT ignores the ECN flag and may return `p0 > 1`, in which case
/// `truncation_required` is set.
pub fn operating_point(params: &NetworkParams, model: &ModelSpec) -> Result<OperatingPoint> {
    params.validate()?;
    let r0 = rtt(params.q_ref, params);
    let n = params.n();
    match model.kind.scenario() {
        Some(_) if !params.ecn_on => operating_point_ecn_off(params, model),
        Some(s) => {
            if !(model.rho > 0.0) {
                return Err(Error::param("rho", model.rho, "must be positive"));
            }
            let ws0 = r0 * params.capacity;
            Ok(OperatingPoint::new(params, ws0, scenario_p0(s, n, ws0, model.rho)))
        }
        None => {
            let ws0 = r0 * params.capacity;
            Ok(OperatingPoint::new(params, ws0, 2.0 * n * n / (ws0 * ws0)))
        }
    }
}

/// Residual tolerance of the ECN-off solve.
pub const ECN_OFF_RESIDUAL: f64 = 1e-12;

/// Operating point when congestion is signalled by drops.
///
/// Solves `p0 = g(W_s0(p0))` with `W_s0 = R0 C / (1 - p0)` and `g` the
/// scenario's window-balance formula. The residual `p - g(W_s0(p))` rises
/// monotonically from negative at 0 to positive near 1.
pub fn operating_point_ecn_off(
    params: &NetworkParams,
    model: &ModelSpec,
) -> Result<OperatingPoint> {
    params.validate()?;
    let scenario = model
        .kind
        .scenario()
        .ok_or(Error::UnsupportedModel(model.kind))?;
    if !(model.rho > 0.0) {
        return Err(Error::param("rho", model.rho, "must be positive"));
    }
    let base = rtt(params.q_ref, params) * params.capacity;
    let n = params.n();
    let residual = |p: f64| p - scenario_p0(scenario, n, base / (1.0 - p), model.rho);
    let p0 = bisect(residual, 0.0, 1.0 - 1e-12, 1e-15)?;
    if residual(p0).abs() > ECN_OFF_RESIDUAL {
        return Err(Error::NoRootInBracket {
            lo: 0.0,
            hi: 1.0 - 1e-12,
        });
    }
    Ok(OperatingPoint::new(params, base / (1.0 - p0), p0))
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `x_tol` or `f` hits zero.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.signum() != f_hi.signum()) || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol || mid == lo || mid == hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    // Return the endpoint with the smaller residual.
    if f(lo).abs() <= f(hi).abs() {
        Ok(lo)
    } else {
        Ok(hi)
    }
}

/// `rho` that makes `scenario` reproduce a measured `p0` at the target queue.
pub fn rho_from_p0(
    p0_measured: f64,
    params: &NetworkParams,
    scenario: Scenario,
    ecn_on: bool,
) -> Result<f64> {
    if !(p0_measured > 0.0 && p0_measured < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p0_measured));
    }
    params.validate()?;
    let p0 = p0_measured;
    let mut ws0 = rtt(params.q_ref, params) * params.capacity;
    if !ecn_on {
        ws0 /= 1.0 - p0;
    }
    let n = params.n();
    Ok(match scenario {
        Scenario::A => 2.0 * n * (1.0 - p0) / (p0 * ws0),
        Scenario::B => 2.0 * n * n * (1.0 - p0) / (p0 * ws0 * ws0),
    })
}

/// Scenario A `rho` giving the same `p0` as Scenario B with `rho_b`.
pub fn rho_a_from_rho_b(rho_b: f64, ws0: f64, n_flows: u32) -> f64 {
    ws0 / f64::from(n_flows) * rho_b
}

/// Operating points of the MGT baseline and both scenarios, in that order.
pub fn compare_models(
    params: &NetworkParams,
    rho_a: f64,
    rho_b: f64,
) -> Result<[(ModelKind, OperatingPoint); 3]> {
    Ok([
        (ModelKind::MgtTruncated, operating_point(params, &ModelSpec::mgt())?),
        (
            ModelKind::ScenarioA,
            operating_point(params, &ModelSpec::scenario_a(rho_a))?,
        ),
        (
            ModelKind::ScenarioB,
            operating_point(params, &ModelSpec::scenario_b(rho_b))?,
        ),
    ])
}
