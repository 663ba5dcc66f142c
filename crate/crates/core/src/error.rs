use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("round-trip time must be positive, got {0}")]
    NonPositiveRtt(f64),

    #[error("aggregate window must be positive, got {0}")]
    NonPositiveWindow(f64),

    #[error("probability {0} is outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("no root of the operating-point equation in [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },

    #[error("time step {dt} s exceeds the AQM sampling period {period} s")]
    StepExceedsPeriod { dt: f64, period: f64 },

    #[error("schedule event at t = {at} s is outside the run [0, {duration}] s")]
    ScheduleOutOfRange { at: f64, duration: f64 },

    #[error("flow count would drop to {0}")]
    FlowCountUnderflow(i64),

    #[error("{0:?} is not supported by this operation")]
    UnsupportedModel(crate::ModelKind),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParam {
            name,
            value,
            reason,
        }
    }
}
