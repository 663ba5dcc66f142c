//! Local stability of the scenario models under PI control.
//!
//! The window law `f(W_s, W_s(t-R), p(t-R), q(t-R))` is linearized at the
//! operating point, the queue at `dq = dW_s / R0 - W_s0 / (R0^2 C) dq`, and
//! the round-trip delay is replaced by the first-order lag `1 / (1 + s R0)`.
//! Closing the loop with `k_p + k_i / s` gives the quartic
//! `s^4 + a1 s^3 + a2 s^2 + a3 s + a4`, whose roots all lie in the open left
//! half-plane iff `a1 > 0`, `a1 a2 - a3 > 0`,
//! `a3 (a1 a2 - a3) - a1^2 a4 > 0` and `a4 > 0`.

use crate::analysis::OperatingPoint;
use crate::network::{NetworkParams, Scenario};
use crate::{Error, Result};

/// Partial derivatives of the window rate at the operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linearization {
    /// With respect to the current window, 1/s.
    pub d_ws: f64,
    /// With respect to the delayed window, 1/s.
    pub d_wsr: f64,
    /// With respect to the delayed marking probability, packets/s.
    pub d_pr: f64,
    /// With respect to the delayed queue, 1/s.
    pub d_qr: f64,
}

/// PI gains in transfer-function form `k_p + k_i / s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiGains {
    pub k_p: f64,
    pub k_i: f64,
}

impl PiGains {
    /// Maps the discrete form `p += a (q - q_ref) - b (q_prev - q_ref)` to
    /// `k_p = b`, `k_i = a - b`.
    pub fn from_discrete(a: f64, b: f64) -> Self {
        PiGains { k_p: b, k_i: a - b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub alpha: [f64; 4],
    pub beta1: f64,
    pub beta2: f64,
    pub stable: bool,
}

pub fn linearize(
    op: &OperatingPoint,
    rho: f64,
    params: &NetworkParams,
    scenario: Scenario,
) -> Result<Linearization> {
    let p0 = op.p0;
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p0));
    }
    let n = params.n();
    let c = params.capacity;
    let (ws0, r0) = (op.ws0, op.r0);
    // Derivatives of the shared decrease term rho W W_R p_R / (2 N R).
    let dec_w = rho * ws0 * p0 / (2.0 * n * r0);
    let dec_p = rho * ws0 * ws0 / (2.0 * n * r0);
    let dec_q = rho * ws0 * ws0 * p0 / (2.0 * n * r0 * r0 * c);
    Ok(match scenario {
        Scenario::A => Linearization {
            d_ws: -dec_w,
            d_wsr: (1.0 - p0) / r0 - dec_w,
            d_pr: -ws0 / r0 - dec_p,
            d_qr: -ws0 * (1.0 - p0) / (r0 * r0 * c) + dec_q,
        },
        Scenario::B => Linearization {
            d_ws: -n * (1.0 - p0) / (r0 * ws0) - dec_w,
            d_wsr: n * (1.0 - p0) / (r0 * ws0) - dec_w,
            d_pr: -n / r0 - dec_p,
            d_qr: -n * (1.0 - p0) / (r0 * r0 * c) + dec_q,
        },
    })
}

/// Coefficients `[a1, a2, a3, a4]` of the closed-loop characteristic quartic.
pub fn characteristic_coeffs(
    lin: &Linearization,
    op: &OperatingPoint,
    params: &NetworkParams,
    gains: PiGains,
) -> [f64; 4] {
    let r0 = op.r0;
    let ws0 = op.ws0;
    let c = params.capacity;
    let sum = lin.d_ws + lin.d_wsr;
    let a1 = 1.0 / r0 - lin.d_ws + ws0 / (r0 * r0 * c);
    let a2 = -sum / r0 + ws0 * (1.0 - lin.d_ws * r0) / (r0 * r0 * r0 * c);
    let a3 = -ws0 * sum / (r0 * r0 * r0 * c) - (lin.d_qr + lin.d_pr * gains.k_p) / (r0 * r0);
    let a4 = -lin.d_pr * gains.k_i / (r0 * r0);
    [a1, a2, a3, a4]
}

/// Routh-Hurwitz conditions for a monic quartic.
pub fn routh_check(alpha: [f64; 4]) -> StabilityReport {
    let [a1, a2, a3, a4] = alpha;
    let beta1 = a1 * a2 - a3;
    let beta2 = a3 * beta1 - a1 * a1 * a4;
    StabilityReport {
        alpha,
        beta1,
        beta2,
        stable: a1 > 0.0 && beta1 > 0.0 && beta2 > 0.0 && a4 > 0.0,
    }
}

/// Linearizes at `op` and checks the PI closed loop in one call.
pub fn analyze(
    op: &OperatingPoint,
    rho: f64,
    params: &NetworkParams,
    scenario: Scenario,
    gains: PiGains,
) -> Result<(Linearization, StabilityReport)> {
    let lin = linearize(op, rho, params, scenario)?;
    let report = routh_check(characteristic_coeffs(&lin, op, params, gains));
    Ok((lin, report))
}
