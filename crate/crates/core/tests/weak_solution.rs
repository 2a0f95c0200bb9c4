//! Space-time flux balance of both conserved quantities on boxes away from
//! the junction, and the structural invariants of the tracked solution.

use ptlight_core::model::{ModelParams, State};
use ptlight_core::riemann::WaveKind;
use ptlight_core::tracking::{
    simulate, transient_end, Orientation, RoadSolution, Simulation, StripePattern,
};
use ptlight_core::LightSchedule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAUSS: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Integrate `g` over `[a, b]` split at `cuts`; `g` is smooth between cuts.
fn piecewise(a: f64, b: f64, mut cuts: Vec<f64>, g: impl Fn(f64) -> [f64; 2]) -> [f64; 2] {
    cuts.retain(|c| *c > a && *c < b);
    cuts.extend([a, b]);
    cuts.sort_by(f64::total_cmp);
    let mut acc = [0.0; 2];
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, wt) in GAUSS {
            let v = g(m + h * x);
            acc[0] += wt * h * v[0];
            acc[1] += wt * h * v[1];
        }
    }
    acc
}

fn front_positions_at(sol: &RoadSolution, t: f64) -> Vec<f64> {
    let k = sol
        .epochs()
        .partition_point(|e| e.t_start <= t)
        .saturating_sub(1);
    let e = &sol.epochs()[k];
    e.fronts
        .iter()
        .map(|&id| sol.front(id).position(t))
        .collect()
}

/// Boundary flux balance of the box `[t0, t1] x [x0, x1]`.
fn balance(p: &ModelParams, sol: &RoadSolution, t0: f64, t1: f64, x0: f64, x1: f64) -> [f64; 2] {
    let mass = |t: f64| {
        piecewise(x0, x1, front_positions_at(sol, t), |x| {
            let s = sol.eval(t, x).unwrap();
            [s.rho, s.eta]
        })
    };
    let flux = |x: f64| {
        let mut cuts = sol.crossings_at(x, t0, t1);
        cuts.extend(sol.breakpoints_in(t0, t1));
        piecewise(t0, t1, cuts, |t| {
            let (f, g) = p.flux(sol.eval(t, x).unwrap());
            [f, g]
        })
    };
    let (m1, m0, fr, fl) = (mass(t1), mass(t0), flux(x1), flux(x0));
    [m1[0] - m0[0] + fr[0] - fl[0], m1[1] - m0[1] + fr[1] - fl[1]]
}

fn runs() -> Vec<(ModelParams, Simulation)> {
    let p = ModelParams::p0();
    let out_c = p.sharp_point(2.8, 0.5).unwrap();
    let data: Vec<Vec<State>> = vec![
        vec![State::new(0.8, 2.0), State::new(0.9, 2.7), out_c],
        vec![State::new(0.24, 0.6), State::new(0.9, 2.7), out_c],
        vec![
            State::new(0.5, 1.25),
            State::new(0.9, 2.7),
            State::new(0.3, 0.9),
        ],
        vec![
            State::new(0.3, 0.75),
            State::new(0.25, 0.7),
            State::new(0.96, 2.6),
            State::new(0.2, 0.55),
        ],
    ];
    let mut out = Vec::new();
    for init in data {
        for ell in [1, 3, 8] {
            let sigma: Vec<f64> = (0..init.len() - 1)
                .map(|i| {
                    if i + 2 == init.len() {
                        1.0
                    } else {
                        0.7 + 0.3 * i as f64
                    }
                })
                .collect();
            let s = LightSchedule::build(1.0, ell, &sigma).unwrap();
            out.push((p, simulate(&p, &s, &init).unwrap()));
        }
    }
    out
}

#[test]
fn boxes_away_from_the_junction_balance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for (p, sim) in runs() {
        for sol in &sim.roads {
            for _ in 0..20 {
                let t0 = rng.random_range(0.0..0.9);
                let t1 = rng.random_range(t0 + 0.01..1.0);
                let (a, b): (f64, f64) = (rng.random_range(0.01..1.2), rng.random_range(0.01..1.2));
                let (x0, x1) = match sol.orientation {
                    Orientation::Outgoing => (a.min(b), a.max(b) + 0.01),
                    Orientation::Incoming(_) => (-a.max(b) - 0.01, -a.min(b)),
                };
                let r = balance(&p, sol, t0, t1, x0, x1);
                worst = worst.max(r[0].abs()).max(r[1].abs());
            }
        }
    }
    assert!(worst <= 1e-8, "worst flux-balance residual {worst:e}");
}

#[test]
fn fronts_are_ordered_and_chained() {
    for (p, sim) in runs() {
        // the initial transient may push a phase transition back towards the
        // junction; downstream fronts move forward once it is absorbed
        let pattern = StripePattern::for_junction(&p, &sim.schedule, &sim.initial).unwrap();
        let settled = transient_end(sim.outgoing(), &pattern).unwrap_or(0.0);
        for sol in &sim.roads {
            for e in sol.epochs() {
                if e.t_end <= e.t_start {
                    continue;
                }
                let tm = 0.5 * (e.t_start + e.t_end);
                let mut state = e.base;
                let mut pos = f64::NEG_INFINITY;
                for &id in &e.fronts {
                    let f = sol.front(id);
                    assert!(f.position(tm) >= pos - 1e-9, "fronts out of order");
                    pos = f.position(tm);
                    assert_eq!(f.left, state, "adjacent states differ");
                    state = f.right;
                    // wave-kind invariants
                    match f.kind {
                        WaveKind::Contact2 | WaveKind::Linear => {
                            let (vl, vr) =
                                (p.velocity(f.left).unwrap(), p.velocity(f.right).unwrap());
                            assert!((vl - vr).abs() < 1e-10);
                            assert!((f.speed - vl).abs() < 1e-10);
                        }
                        WaveKind::Shock1 | WaveKind::Rarefaction1 => {
                            assert!((f.left.w().unwrap() - f.right.w().unwrap()).abs() < 1e-10);
                        }
                        WaveKind::PhaseTransition => {}
                    }
                    let on_incoming = f.position(tm) < -1e-12;
                    let on_outgoing = f.position(tm) > 1e-12;
                    let first_family = matches!(f.kind, WaveKind::Shock1 | WaveKind::Rarefaction1);
                    if on_incoming && first_family {
                        assert!(f.speed < 0.0, "first-family front moving forward upstream");
                    }
                    if on_outgoing && tm > settled {
                        assert!(f.speed >= 0.0, "front moving backward downstream");
                    }
                }
            }
        }
    }
}

#[test]
fn red_roads_are_jammed_at_the_junction() {
    for (p, sim) in runs() {
        let s = &sim.schedule;
        for road in 0..s.roads() {
            for seg in sim.incoming(road).trace_history() {
                let tm = 0.5 * (seg.t_start + seg.t_end);
                if s.green_at(tm).unwrap() != road {
                    assert!(
                        (seg.state.rho - p.r).abs() < 1e-12,
                        "red trace {:?}",
                        seg.state
                    );
                    assert!(p.flux(seg.state).0.abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn green_traces_agree_across_the_junction() {
    for (p, sim) in runs() {
        let s = &sim.schedule;
        let out = sim.outgoing().trace_history();
        for seg in out {
            let tm = 0.5 * (seg.t_start + seg.t_end);
            let g = s.green_at(tm).unwrap();
            let inc = sim
                .incoming(g)
                .trace_history()
                .iter()
                .find(|q| q.t_start <= tm && tm < q.t_end)
                .unwrap();
            assert!((p.flux(inc.state).0 - p.flux(seg.state).0).abs() < 1e-12);
        }
    }
}

#[test]
fn event_count_grows_linearly() {
    let p = ModelParams::p0();
    let out_c = p.sharp_point(2.8, 0.5).unwrap();
    for init in [
        vec![State::new(0.8, 2.0), State::new(0.9, 2.7), out_c],
        vec![State::new(0.24, 0.6), State::new(0.9, 2.7), out_c],
        vec![
            State::new(0.5, 1.25),
            State::new(0.9, 2.7),
            State::new(0.3, 0.9),
        ],
    ] {
        let count = |ell| {
            let s = LightSchedule::build(1.0, ell, &[1.0, 1.0]).unwrap();
            simulate(&p, &s, &init).unwrap().event_count() as f64
        };
        let (a, b) = (count(64), count(256));
        assert!(
            b / 256.0 <= 1.2 * a / 64.0,
            "events {a} at l=64, {b} at l=256"
        );
    }
}

#[test]
fn runs_are_deterministic() {
    let a = runs();
    let b = runs();
    for ((_, x), (_, y)) in a.iter().zip(&b) {
        assert_eq!(x.events, y.events);
        for (r, q) in x.roads.iter().zip(&y.roads) {
            assert_eq!(r.fronts_table(), q.fronts_table());
        }
    }
}
