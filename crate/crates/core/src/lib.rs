//! Fluid-model toolkit for TCP/AQM congestion dynamics.
//!
//! The crate models a single bottleneck link shared by `N` long-lived TCP
//! flows and an active queue management (AQM) controller that updates a
//! marking probability once per sampling period. It provides:
//!
//! * [`models`]: discrete-time window/queue integrators for the slow-start
//!   bound (Scenario A), the congestion-avoidance bound (Scenario B) and the
//!   simplified MGT baseline, plus the coupled simulator.
//! * [`aqm`]: time-driven PI, REM and RaQ controllers.
//! * [`analysis`]: operating points, `rho` inversion and congestion levels.
//! * [`stability`]: linearization and Routh-Hurwitz checks under PI control.
//! * [`metrics`]: settled values and convergence times of a run.
//!
//! All rates are packets/second and all lengths packets. The crate is
//! `no_std` and only needs `alloc` for the delay line and time series.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod aqm;
pub mod analysis;
mod error;
pub mod metrics;
pub mod models;
mod network;
pub mod stability;

pub use crate::error::{Error, Result};
pub use crate::network::{
    arrival_rate, mbps_to_pps, rtt, ModelKind, ModelSpec, NetworkParams, Scenario,
};
