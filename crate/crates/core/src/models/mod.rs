//! Fluid models of the aggregate congestion window and the bottleneck queue.
//!
//! The window laws are written as instantaneous rates ([`continuous_rhs`]);
//! the discrete steps multiply that rate by `dt`, so the discrete and
//! continuous forms agree exactly. [`Simulation`] couples a window law, the
//! queue and an AQM controller through a delay line.

mod delay_line;
mod sim;

pub use self::delay_line::{DelayLine, Sample};
pub use self::sim::{simulate, FlowChange, SimState, Simulation, TimeSeries, TimeSeriesRow};

use crate::network::{rtt, ModelKind, ModelSpec, NetworkParams};
use crate::{Error, Result};

/// Values feeding one window update.
///
/// `ws_now` is the aggregate window at the current step; the `*_delayed`
/// values are taken one round-trip time earlier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInput {
    pub ws_now: f64,
    pub ws_delayed: f64,
    pub p_delayed: f64,
    pub q_delayed: f64,
    pub r_delayed: f64,
    pub dt: f64,
}

fn check_rtt(r: f64) -> Result<()> {
    if r > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveRtt(r))
    }
}

/// Multiplicative-decrease rate shared by both scenarios.
#[inline]
fn decrease_rate(ws_now: f64, ws_delayed: f64, p: f64, r: f64, n: f64, rho: f64) -> f64 {
    rho * ws_now * ws_delayed / (2.0 * n * r) * p
}

fn rhs_scenario_a(
    ws_now: f64,
    ws_delayed: f64,
    p_delayed: f64,
    r_delayed: f64,
    params: &NetworkParams,
    rho: f64,
) -> Result<f64> {
    check_rtt(r_delayed)?;
    let n = params.n();
    Ok(ws_delayed / r_delayed * (1.0 - p_delayed)
        - decrease_rate(ws_now, ws_delayed, p_delayed, r_delayed, n, rho))
}

fn rhs_scenario_b(
    ws_now: f64,
    ws_delayed: f64,
    p_delayed: f64,
    r_delayed: f64,
    params: &NetworkParams,
    rho: f64,
) -> Result<f64> {
    check_rtt(r_delayed)?;
    if !(ws_now > 0.0) {
        return Err(Error::NonPositiveWindow(ws_now));
    }
    let n = params.n();
    Ok(n * ws_delayed / (r_delayed * ws_now) * (1.0 - p_delayed)
        - decrease_rate(ws_now, ws_delayed, p_delayed, r_delayed, n, rho))
}

/// Aggregate-window rate of the simplified MGT model, i.e. `N` times the
/// per-session rate `1/R - W(t-R) W(t) p(t-R) / (2R)`.
fn rhs_mgt(
    ws_now: f64,
    ws_delayed: f64,
    p_delayed: f64,
    r_delayed: f64,
    params: &NetworkParams,
    truncate: bool,
) -> Result<f64> {
    check_rtt(r_delayed)?;
    let n = params.n();
    let w_now = ws_now / n;
    let w_delayed = ws_delayed / n;
    let p = if truncate {
        p_delayed.clamp(0.0, 1.0)
    } else {
        p_delayed
    };
    let per_session = 1.0 / r_delayed - w_delayed * w_now / (2.0 * r_delayed) * p;
    Ok(n * per_session)
}

/// Instantaneous rate of change of the aggregate window, in packets/second.
pub fn continuous_rhs(
    ws_now: f64,
    ws_delayed: f64,
    p_delayed: f64,
    r_delayed: f64,
    params: &NetworkParams,
    model: &ModelSpec,
) -> Result<f64> {
    match model.kind {
        ModelKind::ScenarioA => {
            rhs_scenario_a(ws_now, ws_delayed, p_delayed, r_delayed, params, model.rho)
        }
        ModelKind::ScenarioB => {
            rhs_scenario_b(ws_now, ws_delayed, p_delayed, r_delayed, params, model.rho)
        }
        ModelKind::MgtTruncated => {
            rhs_mgt(ws_now, ws_delayed, p_delayed, r_delayed, params, true)
        }
        ModelKind::MgtUntruncated => {
            rhs_mgt(ws_now, ws_delayed, p_delayed, r_delayed, params, false)
        }
    }
}

/// Window increment over one step for Scenario A (all sessions in slow start).
pub fn step_scenario_a(input: &StepInput, params: &NetworkParams, rho: f64) -> Result<f64> {
    Ok(rhs_scenario_a(
        input.ws_now,
        input.ws_delayed,
        input.p_delayed,
        input.r_delayed,
        params,
        rho,
    )? * input.dt)
}

/// Window increment over one step for Scenario B (all sessions in
/// congestion avoidance).
pub fn step_scenario_b(input: &StepInput, params: &NetworkParams, rho: f64) -> Result<f64> {
    Ok(rhs_scenario_b(
        input.ws_now,
        input.ws_delayed,
        input.p_delayed,
        input.r_delayed,
        params,
        rho,
    )? * input.dt)
}

/// Aggregate window increment for the simplified MGT model.
pub fn step_mgt(input: &StepInput, params: &NetworkParams, truncate: bool) -> Result<f64> {
    Ok(rhs_mgt(
        input.ws_now,
        input.ws_delayed,
        input.p_delayed,
        input.r_delayed,
        params,
        truncate,
    )? * input.dt)
}

/// Window increment for any model.
pub fn step_window(input: &StepInput, params: &NetworkParams, model: &ModelSpec) -> Result<f64> {
    Ok(continuous_rhs(
        input.ws_now,
        input.ws_delayed,
        input.p_delayed,
        input.r_delayed,
        params,
        model,
    )? * input.dt)
}

/// Queue growth rate: arrivals minus service, minus drops when ECN is off.
pub(crate) fn queue_rate(ws: f64, q: f64, p: f64, params: &NetworkParams, ecn_on: bool) -> f64 {
    let arrivals = ws / rtt(q, params);
    if ecn_on {
        arrivals - params.capacity
    } else {
        arrivals - params.capacity - p * arrivals
    }
}

pub(crate) fn clamp_queue_step(q: f64, dq: f64, buffer: f64) -> f64 {
    (q + dq).clamp(0.0, buffer) - q
}

/// Queue increment over `dt`, saturated so that `q + dq` stays in `[0, B]`.
pub fn step_queue(ws: f64, q: f64, p: f64, params: &NetworkParams, dt: f64) -> f64 {
    let dq = queue_rate(ws, q, p, params, params.ecn_on) * dt;
    clamp_queue_step(q, dq, params.buffer)
}
