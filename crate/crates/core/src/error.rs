use std::fmt;

use thiserror::Error;

/// Which standing hypothesis a parameter set violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// `0 < V_max < w_check < w_hat`, `R > 0`.
    SpeedOrdering,
    /// `psi(0) = 1`, `psi(R) = 0`, `psi' <= 0`, `(rho psi)'' <= 0`.
    ProfileShape,
    /// First-family speeds are negative throughout the congested phase.
    NegativeFirstFamily,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self {
            Hypothesis::SpeedOrdering => "H-1",
            Hypothesis::ProfileShape => "H-2",
            Hypothesis::NegativeFirstFamily => "H-3",
        };
        f.write_str(tag)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state (rho={rho}, eta={eta}) is not admissible: {reason}")]
    InvalidState {
        rho: f64,
        eta: f64,
        reason: &'static str,
    },

    #[error("the vacuum state has no maximal speed w = eta/rho")]
    Vacuum,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis {hypothesis} violated at rho={rho}, w={w} (value {value:e}): {detail}")]
    HypothesisViolated {
        hypothesis: Hypothesis,
        rho: f64,
        w: f64,
        value: f64,
        detail: String,
    },

    #[error("system is not strictly hyperbolic in the interior of the free phase")]
    NotStrictlyHyperbolic,

    #[error("degenerate Lax curve: {0}")]
    DegenerateCurve(&'static str),

    #[error("no congested state with w={w} and velocity {v_target}")]
    Infeasible { w: f64, v_target: f64 },

    #[error("states do not form a Rankine-Hugoniot jump (speed mismatch {mismatch:e})")]
    NotAJump { mismatch: f64 },

    #[error("invalid light schedule: {0}")]
    Schedule(String),

    #[error("time {t} outside [0, {horizon})")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("point (t={t}, x={x}) outside the road's domain")]
    OutOfDomain { t: f64, x: f64 },

    #[error("front tracking stopped after {events} events (limit reached at t={t})")]
    ResolutionLimit { events: usize, t: f64 },

    #[error("front tracking invariant broken: {0}")]
    Internal(String),

    #[error("invalid study request: {0}")]
    Study(String),
}

pub type Result<T> = std::result::Result<T, Error>;
