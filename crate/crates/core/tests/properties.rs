//! Randomized invariants of the Riemann solver, the light schedule and the
//! simulator.

use proptest::prelude::*;

use ptlight_core::homogenize::{conservation_check, convergence_study, StudyOptions};
use ptlight_core::model::{ModelParams, State};
use ptlight_core::riemann::{self, Propagation, WaveKind};
use ptlight_core::tracking::{simulate_with, TrackingOptions};
use ptlight_core::{Execution, LightSchedule};

/// A state on the ray `w`, free for `s < 0.5` and congested otherwise.
fn state_from(p: &ModelParams, w: f64, s: f64) -> State {
    let flat = p.flat_point(w).unwrap().rho;
    let rho = if s < 0.5 {
        flat * (0.02 + 1.9 * s)
    } else {
        flat + (p.r - flat) * (0.02 + 0.98 * (2.0 * s - 1.0))
    };
    State::on_ray(w, rho.min(p.r))
}

fn any_state() -> impl Strategy<Value = State> {
    let p = ModelParams::p0();
    (p.w_check..=p.w_hat, 0.0..1.0f64).prop_map(move |(w, s)| state_from(&p, w, s))
}

fn congested_state() -> impl Strategy<Value = State> {
    let p = ModelParams::p0();
    (p.w_check..=p.w_hat, 0.5..1.0f64).prop_map(move |(w, s)| state_from(&p, w, s))
}

proptest! {
    #[test]
    fn riemann_waves_chain_and_order(l in any_state(), r in any_state()) {
        let p = ModelParams::p0();
        let sol = riemann::solve(&p, l, r).unwrap();
        let mut state = l;
        let mut speed = f64::NEG_INFINITY;
        for wave in &sol.waves {
            prop_assert_eq!(wave.left, state);
            prop_assert!(wave.propagation.low() >= speed - 1e-12);
            prop_assert!(wave.propagation.low() <= wave.propagation.high());
            speed = wave.propagation.high();
            state = wave.right;
        }
        prop_assert_eq!(state, r);
    }

    #[test]
    fn jumps_satisfy_rankine_hugoniot(l in any_state(), r in any_state()) {
        let p = ModelParams::p0();
        for wave in riemann::solve(&p, l, r).unwrap().waves {
            if let Propagation::Jump(s) = wave.propagation {
                let (fl, fr) = (p.flux(wave.left), p.flux(wave.right));
                prop_assert!((fr.0 - fl.0 - s * (wave.right.rho - wave.left.rho)).abs() < 1e-10);
                prop_assert!((fr.1 - fl.1 - s * (wave.right.eta - wave.left.eta)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn wave_families_keep_their_invariants(l in any_state(), r in any_state()) {
        let p = ModelParams::p0();
        for wave in riemann::solve(&p, l, r).unwrap().waves {
            match wave.kind {
                WaveKind::Shock1 | WaveKind::Rarefaction1 => {
                    let (wl, wr) = (wave.left.w().unwrap(), wave.right.w().unwrap());
                    prop_assert!((wl - wr).abs() < 1e-10);
                }
                WaveKind::Contact2 | WaveKind::Linear => {
                    let (vl, vr) = (p.velocity(wave.left).unwrap(), p.velocity(wave.right).unwrap());
                    prop_assert!((vl - vr).abs() < 1e-10);
                }
                WaveKind::PhaseTransition => {}
            }
        }
    }

    #[test]
    fn schedule_partitions_the_horizon(
        horizon in 0.1..10.0f64,
        cycles in 1usize..40,
        head in prop::collection::vec(0.05..5.0f64, 1..4),
    ) {
        let mut sigma = head;
        sigma.push(1.0);
        let s = LightSchedule::build(horizon, cycles, &sigma).unwrap();
        let iv = s.intervals();
        prop_assert_eq!(iv.len(), cycles * sigma.len());
        prop_assert_eq!(iv[0].start, 0.0);
        prop_assert!((iv[iv.len() - 1].end - horizon).abs() < 1e-12 * horizon);
        for pair in iv.windows(2) {
            prop_assert_eq!(pair[0].end, pair[1].start);
            prop_assert_eq!((pair[0].road + 1) % sigma.len(), pair[1].road);
        }
        let total: f64 = sigma.iter().sum();
        for (road, sg) in sigma.iter().enumerate() {
            let share = s.green_time(road) / horizon;
            prop_assert!((share - sg / total).abs() < 1e-12);
        }
        for k in [0, iv.len() / 2, iv.len() - 1] {
            let tm = 0.5 * (iv[k].start + iv[k].end);
            prop_assert_eq!(s.green_at(tm).unwrap(), iv[k].road);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn junction_conserves_mass_every_cycle(
        a in congested_state(),
        b in congested_state(),
        out in any_state(),
        cycles in 1usize..6,
        sigma0 in 0.3..3.0f64,
    ) {
        let p = ModelParams::p0();
        let s = LightSchedule::build(1.0, cycles, &[sigma0, 1.0]).unwrap();
        let sim = simulate_with(&p, &s, &[a, b, out], TrackingOptions::default()).unwrap();
        for k in 0..cycles {
            prop_assert!(conservation_check(&sim, k).unwrap() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn parallel_and_sequential_studies_agree(
        a in congested_state(),
        b in congested_state(),
        out in congested_state(),
    ) {
        let p = ModelParams::p0();
        let init = [a, b, out];
        let ells = [1, 2, 4];
        let run = |exec| {
            let opts = StudyOptions { exec, ..StudyOptions::default() };
            convergence_study(&p, &init, &[1.0, 1.0], &ells, &opts).unwrap()
        };
        prop_assert_eq!(run(Execution::Parallel), run(Execution::Sequential));
    }
}
