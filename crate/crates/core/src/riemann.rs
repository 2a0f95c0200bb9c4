//! Exact Riemann solver on a single road.

use crate::error::{Error, Result};
use crate::model::{ModelParams, Phase, State};

/// Tolerance under which two RH speeds computed from the two equations agree.
pub const TOL_RH: f64 = 1e-10;

/// Relative tolerance under which a wave is treated as having zero strength.
const TOL_ELIDE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveKind {
    Linear,
    PhaseTransition,
    Shock1,
    Rarefaction1,
    Contact2,
}

impl WaveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WaveKind::Linear => "linear",
            WaveKind::PhaseTransition => "phase_transition",
            WaveKind::Shock1 => "shock1",
            WaveKind::Rarefaction1 => "rarefaction1",
            WaveKind::Contact2 => "contact2",
        }
    }
}

/// How a wave spreads: a single discontinuity or a centered fan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propagation {
    Jump(f64),
    Fan { low: f64, high: f64 },
}

impl Propagation {
    /// Speed of the leftmost characteristic.
    pub fn low(&self) -> f64 {
        match *self {
            Propagation::Jump(s) => s,
            Propagation::Fan { low, .. } => low,
        }
    }

    /// Speed of the rightmost characteristic.
    pub fn high(&self) -> f64 {
        match *self {
            Propagation::Jump(s) => s,
            Propagation::Fan { high, .. } => high,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub kind: WaveKind,
    pub left: State,
    pub right: State,
    pub propagation: Propagation,
}

impl Wave {
    pub fn is_fan(&self) -> bool {
        matches!(self.propagation, Propagation::Fan { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannSolution {
    pub left: State,
    pub right: State,
    pub waves: Vec<Wave>,
}

impl RiemannSolution {
    /// Intermediate constant states, one per pair of consecutive waves.
    pub fn middles(&self) -> Vec<State> {
        self.waves.windows(2).map(|w| w[0].right).collect()
    }
}

/// How a phase-boundary state is interpreted when picking the case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    Free,
    Congested,
}

fn routes(phase: Phase) -> &'static [Route] {
    match phase {
        Phase::Free => &[Route::Free],
        Phase::Congested => &[Route::Congested],
        // Free first: ties between routings resolve to the free one.
        Phase::Boundary => &[Route::Free, Route::Congested],
    }
}

fn same_state(a: State, b: State) -> bool {
    a.approx_eq(&b, TOL_ELIDE)
}

/// Solve the Riemann problem between `left` (x < 0) and `right` (x > 0).
pub fn solve(p: &ModelParams, left: State, right: State) -> Result<RiemannSolution> {
    p.check_state(left)?;
    p.check_state(right)?;
    let mut best: Option<Vec<Wave>> = None;
    if !same_state(left, right) {
        for &rl in routes(p.phase_unchecked(left)) {
            for &rr in routes(p.phase_unchecked(right)) {
                let waves = solve_routed(p, left, right, rl, rr)?;
                if best.as_ref().is_none_or(|b| waves.len() < b.len()) {
                    best = Some(waves);
                }
            }
        }
    }
    Ok(RiemannSolution {
        left,
        right,
        waves: best.unwrap_or_default(),
    })
}

fn solve_routed(
    p: &ModelParams,
    left: State,
    right: State,
    rl: Route,
    rr: Route,
) -> Result<Vec<Wave>> {
    let mut waves = Vec::with_capacity(2);
    match (rl, rr) {
        (Route::Free, Route::Free) => {
            waves.push(Wave {
                kind: WaveKind::Linear,
                left,
                right,
                propagation: Propagation::Jump(p.v_max),
            });
        }
        (Route::Congested, Route::Congested) => {
            let v_r = p.velocity_unchecked(right);
            let middle = p.sharp_point(left.w()?, v_r)?;
            let middle = push_first_family(p, &mut waves, left, middle)?;
            push_contact(&mut waves, middle, right, v_r);
        }
        (Route::Congested, Route::Free) => {
            // The first-family wave keeps the left maximal speed.
            let middle = p.flat_point(left.w()?)?;
            let middle = push_first_family(p, &mut waves, left, middle)?;
            if !same_state(middle, right) {
                waves.push(Wave {
                    kind: WaveKind::Linear,
                    left: middle,
                    right,
                    propagation: Propagation::Jump(p.v_max),
                });
            }
        }
        (Route::Free, Route::Congested) => {
            let v_r = p.velocity_unchecked(right);
            let middle = p.sharp_point(left.w()?, v_r)?;
            let middle = if same_state(left, middle) {
                left
            } else {
                let speed = rh_speed_unchecked(p, left, middle)?;
                waves.push(Wave {
                    kind: WaveKind::PhaseTransition,
                    left,
                    right: middle,
                    propagation: Propagation::Jump(speed),
                });
                middle
            };
            push_contact(&mut waves, middle, right, v_r);
        }
    }
    // glue consecutive states exactly
    if let Some(last) = waves.last_mut() {
        last.right = right;
    }
    Ok(waves)
}

/// Push the first-family wave from `left` to `middle` (same ray); returns the
/// state that the next wave must start from.
fn push_first_family(
    p: &ModelParams,
    waves: &mut Vec<Wave>,
    left: State,
    middle: State,
) -> Result<State> {
    if same_state(left, middle) {
        return Ok(left);
    }
    if middle.rho > left.rho {
        let speed = rh_speed_unchecked(p, left, middle)?;
        waves.push(Wave {
            kind: WaveKind::Shock1,
            left,
            right: middle,
            propagation: Propagation::Jump(speed),
        });
    } else {
        waves.push(Wave {
            kind: WaveKind::Rarefaction1,
            left,
            right: middle,
            propagation: Propagation::Fan {
                low: p.lambda1(left),
                high: p.lambda1(middle),
            },
        });
    }
    Ok(middle)
}

fn push_contact(waves: &mut Vec<Wave>, middle: State, right: State, speed: f64) {
    if !same_state(middle, right) {
        waves.push(Wave {
            kind: WaveKind::Contact2,
            left: middle,
            right,
            propagation: Propagation::Jump(speed),
        });
    }
}

/// Rankine-Hugoniot speed of the jump `left | right`, checked for consistency
/// between the two conservation laws.
pub fn rh_speed(p: &ModelParams, left: State, right: State) -> Result<f64> {
    p.check_state(left)?;
    p.check_state(right)?;
    rh_speed_unchecked(p, left, right)
}

pub(crate) fn rh_speed_unchecked(p: &ModelParams, left: State, right: State) -> Result<f64> {
    let (fl_rho, fl_eta) = p.flux(left);
    let (fr_rho, fr_eta) = p.flux(right);
    let d_rho = right.rho - left.rho;
    let d_eta = right.eta - left.eta;
    let s_rho = (d_rho != 0.0).then(|| (fr_rho - fl_rho) / d_rho);
    let s_eta = (d_eta != 0.0).then(|| (fr_eta - fl_eta) / d_eta);
    match (s_rho, s_eta) {
        (Some(a), Some(b)) => {
            let mismatch = (a - b).abs();
            if mismatch > TOL_RH * 1.0_f64.max(a.abs()) {
                return Err(Error::NotAJump { mismatch });
            }
            Ok(a)
        }
        (Some(a), None) => {
            // eta continuous: its flux must be continuous too
            let mismatch = (fr_eta - fl_eta).abs();
            if mismatch > TOL_RH {
                return Err(Error::NotAJump { mismatch });
            }
            Ok(a)
        }
        (None, Some(b)) => {
            let mismatch = (fr_rho - fl_rho).abs();
            if mismatch > TOL_RH {
                return Err(Error::NotAJump { mismatch });
            }
            Ok(b)
        }
        (None, None) => Err(Error::InvalidParameter(
            "Rankine-Hugoniot speed of a zero jump".into(),
        )),
    }
}

/// State inside a first-family fan at similarity coordinate `xi`.
pub fn fan_state(p: &ModelParams, wave: &Wave, xi: f64) -> State {
    let w = wave.left.eta / wave.left.rho;
    let (lo, hi) = if wave.left.rho <= wave.right.rho {
        (wave.left.rho, wave.right.rho)
    } else {
        (wave.right.rho, wave.left.rho)
    };
    match wave.propagation {
        Propagation::Fan { low, .. } if xi <= low => wave.left,
        Propagation::Fan { high, .. } if xi >= high => wave.right,
        _ => State::on_ray(w, p.rho_for_lambda1(w, xi, lo, hi)),
    }
}

/// Self-similar state at `xi = x / t`; exactly on a jump the right state is returned.
pub fn eval(p: &ModelParams, sol: &RiemannSolution, xi: f64) -> State {
    for wave in &sol.waves {
        match wave.propagation {
            Propagation::Jump(s) => {
                if xi < s {
                    return wave.left;
                }
            }
            Propagation::Fan { low, high } => {
                if xi < low {
                    return wave.left;
                }
                if xi < high {
                    return fan_state(p, wave, xi);
                }
            }
        }
    }
    sol.right
}

/// Solve many Riemann problems, in parallel when the `parallel` feature is on.
pub fn solve_batch(
    p: &ModelParams,
    pairs: &[(State, State)],
    exec: crate::exec::Execution,
) -> Vec<Result<RiemannSolution>> {
    exec.map(pairs, |&(l, r)| solve(p, l, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p0() -> ModelParams {
        ModelParams::p0()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn free_free_is_one_linear_wave() {
        let sol = solve(&p0(), State::new(0.2, 0.5), State::new(0.3, 0.9)).unwrap();
        assert_eq!(sol.waves.len(), 1);
        assert_eq!(sol.waves[0].kind, WaveKind::Linear);
        assert_eq!(sol.waves[0].propagation, Propagation::Jump(1.0));
    }

    #[test]
    fn constant_data_has_no_waves() {
        let s = State::new(0.8, 2.0);
        assert!(solve(&p0(), s, s).unwrap().waves.is_empty());
    }

    #[test]
    fn congested_congested_shock_and_contact() {
        let sol = solve(&p0(), State::new(0.8, 2.0), State::new(0.9, 2.7)).unwrap();
        let kinds: Vec<_> = sol.waves.iter().map(|w| w.kind).collect();
        assert_eq!(kinds, vec![WaveKind::Shock1, WaveKind::Contact2]);
        let m = sol.waves[0].right;
        assert!(m.approx_eq(&State::new(0.88, 2.2), 1e-14));
        assert!(close(sol.waves[0].propagation.low(), -1.7, 1e-12));
        assert!(close(sol.waves[1].propagation.low(), 0.3, 1e-14));
        assert!(eval(&p0(), &sol, 0.0).approx_eq(&State::new(0.88, 2.2), 1e-14));
        assert_eq!(eval(&p0(), &sol, 5.0), sol.right);
        assert_eq!(eval(&p0(), &sol, -5.0), sol.left);
    }

    #[test]
    fn free_congested_phase_transition() {
        let sol = solve(&p0(), State::new(0.2, 0.5), State::new(0.9, 2.7)).unwrap();
        let kinds: Vec<_> = sol.waves.iter().map(|w| w.kind).collect();
        assert_eq!(kinds, vec![WaveKind::PhaseTransition, WaveKind::Contact2]);
        assert!(close(
            sol.waves[0].propagation.low(),
            (0.264 - 0.2) / (0.88 - 0.2),
            1e-12
        ));
    }

    #[test]
    fn congested_free_uses_left_ray() {
        let p = p0();
        let sol = solve(&p, State::new(0.9, 2.7), State::new(0.2, 0.5)).unwrap();
        let kinds: Vec<_> = sol.waves.iter().map(|w| w.kind).collect();
        assert_eq!(kinds, vec![WaveKind::Rarefaction1, WaveKind::Linear]);
        let m = sol.waves[0].right;
        assert!(m.approx_eq(&p.flat_point(3.0).unwrap(), 1e-14));
        assert!(close(
            sol.waves[0].propagation.low(),
            3.0 * (1.0 - 1.8),
            1e-12
        ));
        assert!(close(
            sol.waves[0].propagation.high(),
            3.0 * (1.0 - 4.0 / 3.0),
            1e-12
        ));
        // inside the fan lambda1 matches xi
        let s = eval(&p, &sol, -1.5);
        assert!(close(p.lambda1(s), -1.5, 1e-12));
        assert!(close(s.eta / s.rho, 3.0, 1e-14));
    }

    #[test]
    fn rh_speed_examples() {
        let p = p0();
        assert!(close(
            rh_speed(&p, State::new(0.8, 2.0), State::new(1.0, 2.5)).unwrap(),
            -2.0,
            1e-12
        ));
        let s = rh_speed(&p, State::new(0.2, 0.5), State::new(0.88, 2.2)).unwrap();
        assert!(close(s, 0.064 / 0.68, 1e-12));
        // a jump across rays with unequal velocities is not a single discontinuity
        assert!(matches!(
            rh_speed(&p, State::new(0.8, 2.0), State::new(0.9, 2.7)),
            Err(Error::NotAJump { .. })
        ));
        let a = State::new(0.4, 1.0);
        assert!(rh_speed(&p, a, a).is_err());
    }

    #[test]
    fn equal_fluxes_give_a_stationary_jump() {
        let p = p0();
        // on w = 2.5 the flux 2.5 rho (1 - rho) equals 0.3 at rho = 0.5 + sqrt(0.13)
        let l = State::on_ray(2.5, 0.3);
        let r = State::on_ray(2.5, 0.5 + 0.13_f64.sqrt());
        assert!(rh_speed(&p, l, r).unwrap().abs() < 1e-12);
    }

    #[test]
    fn boundary_states_canonicalize() {
        let p = p0();
        let flat2 = p.flat_point(3.0).unwrap();
        let sharp1 = p.sharp_point(2.5, 0.5).unwrap();
        let sol = solve(&p, flat2, sharp1).unwrap();
        assert_eq!(sol.waves[0].kind, WaveKind::PhaseTransition);
        assert_eq!(sol.waves.len(), 2);
        // boundary to free: single linear wave
        let sol = solve(&p, p.flat_point(2.5).unwrap(), State::new(0.3, 0.9)).unwrap();
        assert_eq!(sol.waves.len(), 1);
        assert_eq!(sol.waves[0].kind, WaveKind::Linear);
    }

    #[test]
    fn vacuum_right_state() {
        let p = p0();
        let sol = solve(&p, State::new(0.9, 2.7), State::VACUUM).unwrap();
        assert_eq!(sol.waves.len(), 2);
        assert_eq!(sol.waves[1].right, State::VACUUM);
        assert!(solve(&p, State::VACUUM, State::new(0.9, 2.7)).is_err());
    }
}
