//! Two-phase traffic model with a traffic-light-controlled `n -> 1` junction:
//! model primitives, exact Riemann solver, light schedule, front tracking and
//! homogenization diagnostics.

pub mod error;
pub mod exec;
pub mod homogenize;
pub mod model;
pub mod riemann;
pub mod schedule;
pub mod spacetime;
pub mod tracking;

pub use error::{Error, Hypothesis, Result};
pub use exec::Execution;
pub use model::{ModelParams, Phase, Psi, State};
pub use riemann::{RiemannSolution, Wave, WaveKind};
pub use schedule::LightSchedule;
pub use tracking::{simulate, RoadSolution, Simulation, StripePattern, TrackingOptions};
