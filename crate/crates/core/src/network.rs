use crate::{Error, Result};

/// Bottleneck link and flow population.
///
/// Rates are in packets/second, lengths in packets, times in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    /// Number of TCP sessions `N`.
    pub n_flows: u32,
    /// Link capacity `C` in packets/second.
    pub capacity: f64,
    /// Round-trip propagation delay `T_p`.
    pub prop_delay: f64,
    /// Buffer size `B`.
    pub buffer: f64,
    /// Target queue length of the AQM.
    pub q_ref: f64,
    /// Marking (true) or dropping (false) as the congestion signal.
    pub ecn_on: bool,
    /// Only used to convert Mb/s into packets/second.
    pub mean_pkt_bytes: f64,
}

impl Default for NetworkParams {
    /// 500 flows over a 45 Mb/s link with 1000-byte packets, 100 ms
    /// propagation delay, a 1125-packet buffer and a 500-packet target.
    fn default() -> Self {
        NetworkParams {
            n_flows: 500,
            capacity: mbps_to_pps(45.0, 1000.0),
            prop_delay: 0.1,
            buffer: 1125.0,
            q_ref: 500.0,
            ecn_on: true,
            mean_pkt_bytes: 1000.0,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_flows == 0 {
            return Err(Error::param("n_flows", 0.0, "must be at least 1"));
        }
        if !(self.capacity > 0.0 && self.capacity.is_finite()) {
            return Err(Error::param("capacity", self.capacity, "must be positive"));
        }
        if !(self.prop_delay > 0.0 && self.prop_delay.is_finite()) {
            return Err(Error::param(
                "prop_delay",
                self.prop_delay,
                "must be positive",
            ));
        }
        if !(self.buffer > 0.0 && self.buffer.is_finite()) {
            return Err(Error::param("buffer", self.buffer, "must be positive"));
        }
        if !(self.q_ref > 0.0 && self.q_ref <= self.buffer) {
            return Err(Error::param("q_ref", self.q_ref, "must lie in (0, buffer]"));
        }
        if !(self.mean_pkt_bytes > 0.0) {
            return Err(Error::param(
                "mean_pkt_bytes",
                self.mean_pkt_bytes,
                "must be positive",
            ));
        }
        Ok(())
    }

    /// `N` as a float.
    #[inline]
    pub fn n(&self) -> f64 {
        f64::from(self.n_flows)
    }

    /// Largest possible round-trip time, reached with a full buffer.
    pub fn max_rtt(&self) -> f64 {
        rtt(self.buffer, self)
    }
}

/// Which fluid model drives the aggregate window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Every session in slow start or fast recovery.
    ScenarioA,
    /// Every session in congestion avoidance or fast recovery.
    ScenarioB,
    /// Simplified MGT model with the marking probability truncated to 1.
    MgtTruncated,
    /// Simplified MGT model with the raw (possibly > 1) probability.
    MgtUntruncated,
}

impl ModelKind {
    pub fn scenario(self) -> Option<Scenario> {
        match self {
            ModelKind::ScenarioA => Some(Scenario::A),
            ModelKind::ScenarioB => Some(Scenario::B),
            ModelKind::MgtTruncated | ModelKind::MgtUntruncated => None,
        }
    }

    pub fn is_mgt(self) -> bool {
        self.scenario().is_none()
    }
}

/// The two bounding scenarios of the window model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    A,
    B,
}

impl From<Scenario> for ModelKind {
    fn from(s: Scenario) -> Self {
        match s {
            Scenario::A => ModelKind::ScenarioA,
            Scenario::B => ModelKind::ScenarioB,
        }
    }
}

/// A model together with its window-dispersion parameter `rho`.
///
/// `rho` scales the multiplicative decrease: 1 means all windows are equal,
/// `N` means a single session holds the whole window. MGT ignores it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub rho: f64,
}

impl ModelSpec {
    pub fn scenario_a(rho: f64) -> Self {
        ModelSpec {
            kind: ModelKind::ScenarioA,
            rho,
        }
    }

    pub fn scenario_b(rho: f64) -> Self {
        ModelSpec {
            kind: ModelKind::ScenarioB,
            rho,
        }
    }

    pub fn scenario(scenario: Scenario, rho: f64) -> Self {
        ModelSpec {
            kind: scenario.into(),
            rho,
        }
    }

    pub fn mgt() -> Self {
        ModelSpec {
            kind: ModelKind::MgtTruncated,
            rho: 1.0,
        }
    }

    pub fn mgt_untruncated() -> Self {
        ModelSpec {
            kind: ModelKind::MgtUntruncated,
            rho: 1.0,
        }
    }

    /// Checks `1 <= rho <= N` for the scenario models.
    pub fn validate(&self, params: &NetworkParams) -> Result<()> {
        if self.kind.is_mgt() {
            return Ok(());
        }
        if !(self.rho >= 1.0 && self.rho <= params.n()) {
            return Err(Error::param("rho", self.rho, "must lie in [1, N]"));
        }
        Ok(())
    }
}

/// Round-trip time seen by a packet joining a queue of `q` packets.
#[inline]
pub fn rtt(q: f64, params: &NetworkParams) -> f64 {
    params.prop_delay + q / params.capacity
}

/// Packet arrival rate at the link for an aggregate window `ws`.
pub fn arrival_rate(ws: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveRtt(r));
    }
    Ok(ws / r)
}

pub fn mbps_to_pps(mbps: f64, pkt_bytes: f64) -> f64 {
    mbps * 1e6 / (8.0 * pkt_bytes)
}
