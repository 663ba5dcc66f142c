use alloc::vec::Vec;

use super::delay_line::{DelayLine, Sample};
use super::{clamp_queue_step, continuous_rhs, queue_rate};
use crate::analysis::OperatingPoint;
use crate::aqm::{steps_per_update, AqmConfig, AqmState, Controller};
use crate::network::{rtt, ModelKind, ModelSpec, NetworkParams};
use crate::{Error, Result};

/// Smallest aggregate window the integrator allows, in packets.
pub const WS_FLOOR: f64 = 1.0;

/// A change of the flow population during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowChange {
    /// Time of the change in seconds.
    pub at: f64,
    /// Sessions joining (positive) or leaving (negative).
    pub delta: i64,
    /// New `rho` for the scenario models, if it changes with `N`.
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRow {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub ws: f64,
    pub r: f64,
    pub lambda: f64,
}

/// Samples of a run at constant spacing `spacing`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub spacing: f64,
    pub rows: Vec<TimeSeriesRow>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TimeSeriesRow> {
        self.rows.last()
    }

    /// Rows with `t >= from`.
    pub fn since(&self, from: f64) -> &[TimeSeriesRow] {
        let start = self.rows.partition_point(|r| r.t < from);
        &self.rows[start..]
    }
}

/// Snapshot of the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub ws: f64,
    pub q: f64,
    pub p: f64,
    pub n_flows: u32,
}

/// Coupled window/queue/AQM integrator.
///
/// Each step reads the window, probability and RTT one round-trip time in
/// the past (lag `floor(R/dt)` with `R` the current RTT), advances the
/// window and the queue by explicit Euler, and every `T` seconds lets the
/// controller sample the link. The probability is held between samples.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: NetworkParams,
    model: ModelSpec,
    controller: Controller,
    dt: f64,
    per_update: u64,
    steps: u64,
    ws: f64,
    q: f64,
    history: DelayLine,
}

impl Simulation {
    /// Starts from one packet per session, an empty queue and no marking.
    pub fn new(params: NetworkParams, model: ModelSpec, aqm: AqmConfig, dt: f64) -> Result<Self> {
        let ws = params.n();
        Self::from_state(params, model, aqm, dt, ws, 0.0, 0.0)
    }

    /// Starts from a constant history at `(ws, q, p)`.
    pub fn from_state(
        params: NetworkParams,
        model: ModelSpec,
        aqm: AqmConfig,
        dt: f64,
        ws: f64,
        q: f64,
        p: f64,
    ) -> Result<Self> {
        params.validate()?;
        model.validate(&params)?;
        aqm.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", dt, "must be positive"));
        }
        let per_update = steps_per_update(aqm.period(), dt)?;
        let mut state = AqmState::new(&aqm, p, q, &params);
        if model.kind == ModelKind::MgtUntruncated {
            state = state.unbounded();
        }
        let q = q.clamp(0.0, params.buffer);
        let ws = ws.max(WS_FLOOR);
        let capacity = libm::ceil(params.max_rtt() / dt) as usize + 2;
        let sample = Sample {
            ws,
            q,
            p,
            r: rtt(q, &params),
        };
        Ok(Simulation {
            params,
            model,
            controller: Controller::new(aqm, state),
            dt,
            per_update,
            steps: 0,
            ws,
            q,
            history: DelayLine::new(capacity, sample),
        })
    }

    /// Starts at the fixed point `op`.
    pub fn from_operating_point(
        params: NetworkParams,
        model: ModelSpec,
        aqm: AqmConfig,
        dt: f64,
        op: &OperatingPoint,
    ) -> Result<Self> {
        Self::from_state(params, model, aqm, dt, op.ws0, op.q0, op.p0)
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn history(&self) -> &DelayLine {
        &self.history
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn state(&self) -> SimState {
        SimState {
            t: self.time(),
            ws: self.ws,
            q: self.q,
            p: self.controller.p(),
            n_flows: self.params.n_flows,
        }
    }

    fn row(&self) -> TimeSeriesRow {
        let r = rtt(self.q, &self.params);
        TimeSeriesRow {
            t: self.time(),
            q: self.q,
            p: self.controller.p(),
            ws: self.ws,
            r,
            lambda: self.ws / r,
        }
    }

    /// Advances one `dt`.
    pub fn step(&mut self) -> Result<()> {
        let p_now = self.controller.p();
        let r_now = rtt(self.q, &self.params);
        let lag = libm::floor(r_now / self.dt) as usize;
        let past = *self.history.lagged(lag);

        let rate = continuous_rhs(self.ws, past.ws, past.p, past.r, &self.params, &self.model)?;
        // MGT has no notion of ECN; its queue always follows the marking law.
        let ecn_on = self.params.ecn_on || self.model.kind.is_mgt();
        let dq = queue_rate(self.ws, self.q, p_now, &self.params, ecn_on) * self.dt;

        self.q += clamp_queue_step(self.q, dq, self.params.buffer);
        self.ws = (self.ws + rate * self.dt).max(WS_FLOOR);
        self.steps += 1;

        if self.steps % self.per_update == 0 {
            let r = rtt(self.q, &self.params);
            self.controller.update(self.q, self.ws / r, &self.params);
        }
        self.history.push(Sample {
            ws: self.ws,
            q: self.q,
            p: self.controller.p(),
            r: rtt(self.q, &self.params),
        });
        Ok(())
    }

    /// Applies a population change. Joining sessions start with one packet;
    /// leaving sessions take their average share of the window with them.
    pub fn apply(&mut self, change: &FlowChange) -> Result<()> {
        let old = i64::from(self.params.n_flows);
        let new = old + change.delta;
        if new < 1 {
            return Err(Error::FlowCountUnderflow(new));
        }
        let new_u32 =
            u32::try_from(new).map_err(|_| Error::param("n_flows", new as f64, "too large"))?;
        if change.delta > 0 {
            self.ws += change.delta as f64;
        } else {
            self.ws = (self.ws * new as f64 / old as f64).max(WS_FLOOR);
        }
        self.params.n_flows = new_u32;
        if let Some(rho) = change.rho {
            self.model.rho = rho;
        }
        self.model.validate(&self.params)
    }

    /// Runs for `duration` seconds, recording every `stride`-th step
    /// (the initial state included).
    pub fn run(
        &mut self,
        duration: f64,
        schedule: &[FlowChange],
        stride: usize,
    ) -> Result<TimeSeries> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::param("duration", duration, "must be positive"));
        }
        let mut events: Vec<FlowChange> = schedule.to_vec();
        for e in &events {
            if !(0.0..=duration).contains(&e.at) {
                return Err(Error::ScheduleOutOfRange { at: e.at, duration });
            }
        }
        events.sort_by(|a, b| a.at.total_cmp(&b.at));

        let stride = stride.max(1) as u64;
        let total = libm::round(duration / self.dt) as u64;
        let start = self.steps;
        let mut out = TimeSeries {
            spacing: self.dt * stride as f64,
            rows: Vec::with_capacity((total / stride + 1) as usize),
        };
        let mut next_event = 0;
        for k in 0..=total {
            let t = (k as f64) * self.dt;
            while next_event < events.len() && events[next_event].at <= t + 0.5 * self.dt {
                self.apply(&events[next_event])?;
                next_event += 1;
            }
            if k % stride == 0 {
                let mut row = self.row();
                row.t = t;
                out.rows.push(row);
            }
            if k < total {
                self.step()?;
            }
        }
        debug_assert_eq!(self.steps - start, total);
        Ok(out)
    }
}

/// Runs a model from the default initial state and records every step.
pub fn simulate(
    params: &NetworkParams,
    model: &ModelSpec,
    aqm: &AqmConfig,
    dt: f64,
    duration: f64,
    schedule: &[FlowChange],
) -> Result<TimeSeries> {
    Simulation::new(*params, *model, *aqm, dt)?.run(duration, schedule, 1)
}
