//! Scenario files, CSV exports and the experiments behind the `ptlight` binary.

pub mod csv;
pub mod run;
pub mod scenario;

pub use run::{run, Outcome};
pub use scenario::{load_scenario, parse_scenario, preset, Experiment, Scenario};

/// Machine-readable tag for an error chain: the core error variant when there
/// is one, otherwise `"scenario"`.
pub fn error_kind(err: &anyhow::Error) -> &'static str {
    use ptlight_core::Error as E;
    let Some(core) = err.chain().find_map(|e| e.downcast_ref::<E>()) else {
        return "scenario";
    };
    match core {
        E::InvalidState { .. } => "invalid_state",
        E::Vacuum => "vacuum",
        E::InvalidParameter(_) => "invalid_parameter",
        E::HypothesisViolated { .. } => "hypothesis_violated",
        E::NotStrictlyHyperbolic => "not_strictly_hyperbolic",
        E::DegenerateCurve(_) => "degenerate_curve",
        E::Infeasible { .. } => "infeasible",
        E::NotAJump { .. } => "not_a_jump",
        E::Schedule(_) => "schedule",
        E::TimeOutOfRange { .. } => "time_out_of_range",
        E::OutOfDomain { .. } => "out_of_domain",
        E::ResolutionLimit { .. } => "resolution_limit",
        E::Internal(_) => "internal",
        E::Study(_) => "study",
    }
}
