//! Time-driven AQM controllers.
//!
//! Each controller samples the queue (and for REM/RaQ the arrival rate) once
//! per period `T` and produces a marking probability that is held constant
//! until the next sample.

use crate::network::NetworkParams;
use crate::{Error, Result};

/// PI controller in its discrete form:
/// `p += a (q - q_ref) - b (q_prev - q_ref)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiConfig {
    pub a: f64,
    pub b: f64,
    pub period: f64,
}

impl Default for PiConfig {
    fn default() -> Self {
        PiConfig {
            a: 0.000_018_22,
            b: 0.000_018_16,
            period: 0.005,
        }
    }
}

/// Random Exponential Marking.
///
/// The link price integrates `alpha (q - q_ref) + (lambda - C) T` scaled by
/// `gamma`, and the marking probability is `1 - phi^(-price)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemConfig {
    pub gamma: f64,
    pub phi: f64,
    pub alpha: f64,
    pub period: f64,
}

impl Default for RemConfig {
    fn default() -> Self {
        RemConfig {
            gamma: 0.001,
            phi: 1.001,
            alpha: 0.1,
            period: 0.005,
        }
    }
}

/// Rate- and queue-based controller: PI on the queue error normalised by the
/// buffer size plus a proportional term on the rate mismatch `(lambda - C) / C`.
///
/// When drops are the congestion signal the rate term uses the admitted rate
/// `lambda (1 - p)`, so a settled loop still balances at `q_ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaqConfig {
    pub q_kp: f64,
    pub q_ki: f64,
    pub r_kp: f64,
    pub period: f64,
    /// Queue errors are divided by this many packets before the gains apply;
    /// `None` uses the buffer size.
    pub queue_norm: Option<f64>,
}

impl Default for RaqConfig {
    fn default() -> Self {
        RaqConfig {
            q_kp: 0.0077,
            q_ki: 0.0005,
            r_kp: 0.0095,
            period: 0.005,
            queue_norm: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AqmConfig {
    Pi(PiConfig),
    Rem(RemConfig),
    Raq(RaqConfig),
}

impl Default for AqmConfig {
    fn default() -> Self {
        AqmConfig::Pi(PiConfig::default())
    }
}

impl AqmConfig {
    /// Sampling period `T` in seconds.
    pub fn period(&self) -> f64 {
        match self {
            AqmConfig::Pi(c) => c.period,
            AqmConfig::Rem(c) => c.period,
            AqmConfig::Raq(c) => c.period,
        }
    }

    pub fn with_period(mut self, period: f64) -> Self {
        match &mut self {
            AqmConfig::Pi(c) => c.period = period,
            AqmConfig::Rem(c) => c.period = period,
            AqmConfig::Raq(c) => c.period = period,
        }
        self
    }

    pub fn name(&self) -> &'static str {
        match self {
            AqmConfig::Pi(_) => "pi",
            AqmConfig::Rem(_) => "rem",
            AqmConfig::Raq(_) => "raq",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let period = self.period();
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::param("aqm.T", period, "must be positive"));
        }
        let non_negative = |name, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, v, "gain must be non-negative"))
            }
        };
        match self {
            AqmConfig::Pi(c) => {
                non_negative("aqm.a", c.a)?;
                non_negative("aqm.b", c.b)
            }
            AqmConfig::Rem(c) => {
                non_negative("aqm.gamma", c.gamma)?;
                non_negative("aqm.alpha", c.alpha)?;
                if c.phi > 1.0 && c.phi.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("aqm.phi", c.phi, "must exceed 1"))
                }
            }
            AqmConfig::Raq(c) => {
                non_negative("aqm.q_kp", c.q_kp)?;
                non_negative("aqm.q_ki", c.q_ki)?;
                non_negative("aqm.r_kp", c.r_kp)?;
                match c.queue_norm {
                    Some(n) if !(n > 0.0 && n.is_finite()) => {
                        Err(Error::param("aqm.queue_norm", n, "must be positive"))
                    }
                    _ => Ok(()),
                }
            }
        }
    }
}

/// Controller memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AqmState {
    /// Current marking probability.
    pub p: f64,
    /// PI: previous queue sample. REM: link price. RaQ: previous queue error.
    pub aux: f64,
    /// Upper clamp applied to PI and RaQ outputs. 1 for a probability,
    /// infinity for the untruncated MGT experiments.
    pub ceiling: f64,
}

impl AqmState {
    /// Fresh state with `p` marking and `q` as the last observed queue.
    pub fn new(config: &AqmConfig, p: f64, q: f64, params: &NetworkParams) -> Self {
        let aux = match config {
            AqmConfig::Pi(_) => q,
            AqmConfig::Rem(c) => price_for(p, c.phi),
            AqmConfig::Raq(_) => q - params.q_ref,
        };
        AqmState {
            p,
            aux,
            ceiling: 1.0,
        }
    }

    pub fn unbounded(mut self) -> Self {
        self.ceiling = f64::INFINITY;
        self
    }
}

/// REM price giving marking probability `p`.
fn price_for(p: f64, phi: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -libm::log1p(-p.min(1.0 - f64::EPSILON)) / libm::log(phi)
    }
}

pub fn pi_update(state: &mut AqmState, q: f64, cfg: &PiConfig, params: &NetworkParams) -> f64 {
    let q_prev = state.aux;
    let p = state.p + cfg.a * (q - params.q_ref) - cfg.b * (q_prev - params.q_ref);
    state.p = p.clamp(0.0, state.ceiling);
    state.aux = q;
    state.p
}

pub fn rem_update(
    state: &mut AqmState,
    q: f64,
    lambda: f64,
    cfg: &RemConfig,
    params: &NetworkParams,
) -> f64 {
    let mismatch = cfg.alpha * (q - params.q_ref) + (lambda - params.capacity) * cfg.period;
    let price = (state.aux + cfg.gamma * mismatch).max(0.0);
    state.aux = price;
    state.p = 1.0 - libm::pow(cfg.phi, -price);
    state.p
}

pub fn raq_update(
    state: &mut AqmState,
    q: f64,
    lambda: f64,
    cfg: &RaqConfig,
    params: &NetworkParams,
) -> f64 {
    let norm = cfg.queue_norm.unwrap_or(params.buffer);
    let e_q = (q - params.q_ref) / norm;
    let e_prev = state.aux / norm;
    let admitted = if params.ecn_on {
        lambda
    } else {
        lambda * (1.0 - state.p)
    };
    let e_r = (admitted - params.capacity) / params.capacity;
    let p = state.p + cfg.q_kp * (e_q - e_prev) + cfg.q_ki * e_q + cfg.r_kp * e_r;
    state.p = p.clamp(0.0, state.ceiling);
    state.aux = q - params.q_ref;
    state.p
}

/// Output between sampling instants.
#[inline]
pub fn hold(state: &AqmState) -> f64 {
    state.p
}

/// Number of integration steps per AQM sample.
pub fn steps_per_update(period: f64, dt: f64) -> Result<u64> {
    if dt > period * (1.0 + 1e-9) {
        return Err(Error::StepExceedsPeriod { dt, period });
    }
    Ok(libm::round(period / dt).max(1.0) as u64)
}

/// A configured controller with its state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controller {
    pub config: AqmConfig,
    pub state: AqmState,
}

impl Controller {
    pub fn new(config: AqmConfig, state: AqmState) -> Self {
        Controller { config, state }
    }

    /// Samples the link and returns the new marking probability.
    pub fn update(&mut self, q: f64, lambda: f64, params: &NetworkParams) -> f64 {
        match &self.config {
            AqmConfig::Pi(c) => pi_update(&mut self.state, q, c, params),
            AqmConfig::Rem(c) => rem_update(&mut self.state, q, lambda, c, params),
            AqmConfig::Raq(c) => raq_update(&mut self.state, q, lambda, c, params),
        }
    }

    #[inline]
    pub fn p(&self) -> f64 {
        hold(&self.state)
    }
}
