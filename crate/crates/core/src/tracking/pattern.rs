use crate::error::{Error, Result};
use crate::model::{ModelParams, Phase, State};
use crate::schedule::LightSchedule;
use crate::spacetime::{self, Rect};

use super::{Orientation, RoadSolution};

/// States closer than this are treated as equal when comparing solutions.
pub const TOL_STATE: f64 = 1e-12;

/// Reference solution on the outgoing road: each green interval emits a
/// stripe that travels at one common speed `λ`.
///
/// The state at `(t, x)` with `x < λ t` is the stripe emitted at
/// `s = t - x / λ`; ahead of the lead line `x = λ t` the initial state remains.
#[derive(Debug, Clone, PartialEq)]
pub struct StripePattern {
    speed: f64,
    ahead: State,
    horizon: f64,
    /// Start time of each emission interval.
    starts: Vec<f64>,
    states: Vec<State>,
}

impl StripePattern {
    /// Pattern with explicit stripe states, one per incoming road, optionally
    /// replacing the very first stripe.
    pub fn new(
        speed: f64,
        ahead: State,
        schedule: &LightSchedule,
        per_road: &[State],
        first: Option<State>,
    ) -> Result<Self> {
        if speed.is_nan() || speed <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "stripe speed must be positive, got {speed}"
            )));
        }
        if per_road.len() != schedule.roads() {
            return Err(Error::InvalidParameter(
                "one stripe state per incoming road expected".into(),
            ));
        }
        let starts = schedule.intervals().iter().map(|iv| iv.start).collect();
        let mut states: Vec<State> = schedule
            .intervals()
            .iter()
            .map(|iv| per_road[iv.road])
            .collect();
        if let Some(s) = first {
            states[0] = s;
        }
        Ok(StripePattern {
            speed,
            ahead,
            horizon: schedule.horizon(),
            starts,
            states,
        })
    }

    /// The stripe pattern predicted for a junction whose incoming roads keep a
    /// queue through every green phase.
    ///
    /// Congested outgoing road: stripes sit on the speed `v̄_{n+1}` at the
    /// incoming `w` values. Free outgoing road: stripes are the maximal-flow
    /// points, except that the first interval carries road 1's own free state.
    pub fn for_junction(p: &ModelParams, schedule: &LightSchedule, init: &[State]) -> Result<Self> {
        let n = schedule.roads();
        if init.len() != n + 1 {
            return Err(Error::InvalidParameter(
                "n + 1 initial states expected".into(),
            ));
        }
        let out = init[n];
        let w: Vec<f64> = init[..n].iter().map(|s| s.w()).collect::<Result<_>>()?;
        match p.phase_of(out)? {
            Phase::Congested => {
                let v = p.velocity(out)?;
                let per_road: Vec<State> = w
                    .iter()
                    .map(|&wi| p.sharp_point(wi, v))
                    .collect::<Result<_>>()?;
                StripePattern::new(v, out, schedule, &per_road, None)
            }
            Phase::Free | Phase::Boundary => {
                let per_road: Vec<State> = w
                    .iter()
                    .map(|&wi| p.flat_point(wi))
                    .collect::<Result<_>>()?;
                let first = p.phase_of(init[0])?.is_free().then_some(init[0]);
                StripePattern::new(p.v_max, out, schedule, &per_road, first)
            }
        }
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn ahead(&self) -> State {
        self.ahead
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Stripe states in emission order.
    pub fn stripes(&self) -> &[State] {
        &self.states
    }

    /// Emission times of the stripe boundaries, the lead line first.
    pub fn emission_times(&self) -> &[f64] {
        &self.starts
    }

    /// Value at `(t, x)`, `x >= 0`; on a stripe boundary the right state is returned.
    pub fn state(&self, t: f64, x: f64) -> State {
        if x >= self.speed * t {
            return self.ahead;
        }
        let s = t - x / self.speed;
        let k = self.starts.partition_point(|&a| a <= s).saturating_sub(1);
        self.states[k]
    }

    /// Whether `state` is one of the pattern's states (up to `tol`).
    pub fn contains(&self, state: &State, tol: f64) -> bool {
        state.approx_eq(&self.ahead, tol) || self.states.iter().any(|s| s.approx_eq(state, tol))
    }
}

/// Area of `{(t, x) : sol != reference}` inside `(0, T) x (0, V_max T)`,
/// beyond which the outgoing road still carries its initial state.
pub fn deviation_set_measure(sol: &RoadSolution, reference: &StripePattern) -> f64 {
    let t = sol.horizon();
    let rect = Rect::new(0.0, t, 0.0, sol.params().v_max * t);
    deviation_in(sol, reference, rect)
}

pub fn deviation_in(sol: &RoadSolution, reference: &StripePattern, rect: Rect) -> f64 {
    let [area] = spacetime::integrate(&[sol, reference], rect, |v| {
        [(!v[0].approx_eq(&v[1], TOL_STATE)) as u8 as f64]
    });
    area
}

/// Area where the solution takes a state the reference never takes: the
/// region still occupied by the initial transient.
pub fn transient_measure(sol: &RoadSolution, reference: &StripePattern) -> f64 {
    let t = sol.horizon();
    let rect = Rect::new(0.0, t, 0.0, sol.params().v_max * t);
    let [area] = spacetime::integrate(&[sol], rect, |v| {
        [(!reference.contains(&v[0], TOL_STATE)) as u8 as f64]
    });
    area
}

/// Last time at which the outgoing road carries a state foreign to the
/// reference; `None` when it never does. A value below the horizon means the
/// transient was absorbed within the simulated window.
pub fn transient_end(sol: &RoadSolution, reference: &StripePattern) -> Option<f64> {
    assert_eq!(
        sol.orientation,
        Orientation::Outgoing,
        "transient_end needs the outgoing road"
    );
    let mut last = None;
    for e in sol.epochs() {
        if e.t_end <= e.t_start {
            continue;
        }
        let tm = 0.5 * (e.t_start + e.t_end);
        let mut state = e.base;
        let mut foreign = false;
        for (k, &id) in e.fronts.iter().enumerate() {
            let f = sol.front(id);
            if f.position(tm) > 0.0 && !reference.contains(&state, TOL_STATE) {
                foreign = true;
                break;
            }
            state = f.right;
            if k + 1 == e.fronts.len() && !reference.contains(&state, TOL_STATE) {
                foreign = true;
            }
        }
        if e.fronts.is_empty() && !reference.contains(&state, TOL_STATE) {
            foreign = true;
        }
        if foreign {
            last = Some(e.t_end);
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stripes_follow_emission_time() {
        let p = ModelParams::p0();
        let s = LightSchedule::build(1.0, 2, &[1.0, 1.0]).unwrap();
        let out = p.sharp_point(2.8, 0.5).unwrap();
        let init = [State::new(0.8, 2.0), State::new(0.9, 2.7), out];
        let pat = StripePattern::for_junction(&p, &s, &init).unwrap();
        assert!((pat.speed() - 0.5).abs() < 1e-14);
        assert_eq!(pat.state(0.5, 0.3), out);
        // emitted at s = 0.9 - 0.15 / 0.5 = 0.6, road 1's second green
        assert!(pat.state(0.9, 0.15).approx_eq(&State::new(0.8, 2.0), 1e-15));
        // emitted at s = 0.8, road 2
        let sharp2 = p.sharp_point(3.0, 0.5).unwrap();
        assert!(pat.state(0.9, 0.05).approx_eq(&sharp2, 1e-15));
        assert!((sharp2.rho - 5.0 / 6.0).abs() < 1e-15);
        assert!((sharp2.eta - 2.5).abs() < 1e-14);
    }

    #[test]
    fn free_outgoing_uses_flat_points() {
        let p = ModelParams::p0();
        let s = LightSchedule::build(1.0, 1, &[1.0, 1.0]).unwrap();
        let i1 = State::new(0.5, 1.25);
        let init = [i1, State::new(0.9, 2.7), State::new(0.3, 0.9)];
        let pat = StripePattern::for_junction(&p, &s, &init).unwrap();
        assert_eq!(pat.speed(), 1.0);
        assert_eq!(pat.stripes()[0], i1);
        assert_eq!(pat.stripes()[1], p.flat_point(2.7 / 0.9).unwrap());
    }
}
