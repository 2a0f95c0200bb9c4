//! The `ℓ -> ∞` experiment: closed-form weak limit on the outgoing road,
//! pairing and L¹ errors, effective maximal-speed trace and rate fits.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{ModelParams, Phase, State};
use crate::schedule::LightSchedule;
use crate::spacetime::{self, Field, Line, Rect};
use crate::tracking::{self, RoadSolution, Simulation, StripePattern, TrackingOptions};

/// Weak limit on the outgoing road: the averaged state behind `x = λ t`,
/// the initial state ahead of it.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitSolution {
    pub outgoing: State,
    pub speed: f64,
    pub averaged: State,
    /// Free when the maximal-flow points are averaged, Congested otherwise.
    pub branch: Phase,
    /// The averaged points, one per incoming road.
    pub points: Vec<State>,
    pub sigma: Vec<f64>,
    pub w_incoming: Vec<f64>,
}

impl LimitSolution {
    pub fn state(&self, t: f64, x: f64) -> State {
        if x < self.speed * t {
            self.averaged
        } else {
            self.outgoing
        }
    }

    /// Rankine–Hugoniot residuals of the lead jump for both equations.
    pub fn rh_residual(&self, p: &ModelParams) -> (f64, f64) {
        let (l, r) = (self.averaged, self.outgoing);
        let (fl, gl) = p.flux(l);
        let (fr, gr) = p.flux(r);
        let lam = self.speed;
        (
            (fr - fl - lam * (r.rho - l.rho)).abs(),
            (gr - gl - lam * (r.eta - l.eta)).abs(),
        )
    }
}

impl LimitSolution {
    /// The same limit with different green-time weights.
    pub fn with_sigma(&self, sigma: &[f64]) -> LimitSolution {
        assert_eq!(
            sigma.len(),
            self.points.len(),
            "one weight per incoming road"
        );
        LimitSolution {
            averaged: weighted_average(&self.points, sigma),
            sigma: sigma.to_vec(),
            ..self.clone()
        }
    }
}

impl Field for LimitSolution {
    fn breaks(&self, _t0: f64, _t1: f64) -> Vec<f64> {
        Vec::new()
    }

    fn lines(&self, _ta: f64, _tb: f64, _x0: f64, _x1: f64, out: &mut Vec<Line>) {
        out.push(Line {
            t_ref: 0.0,
            x_ref: 0.0,
            speed: self.speed,
            key: 0,
        });
    }

    fn value(&self, t: f64, x: f64) -> State {
        self.state(t, x)
    }
}

pub fn closed_form_limit(
    p: &ModelParams,
    s: &LightSchedule,
    init: &[State],
) -> Result<LimitSolution> {
    let n = s.roads();
    if init.len() != n + 1 {
        return Err(Error::InvalidParameter(format!(
            "expected {} initial states, got {}",
            n + 1,
            init.len()
        )));
    }
    for st in init {
        p.check_state(*st)?;
    }
    let out = init[n];
    let w: Vec<f64> = init[..n].iter().map(|st| st.w()).collect::<Result<_>>()?;
    let phase = p.phase_of(out)?;
    let (branch, speed, points) = match phase {
        Phase::Congested => {
            let v = p.velocity(out)?;
            let pts = w
                .iter()
                .map(|&wi| p.sharp_point(wi, v))
                .collect::<Result<Vec<_>>>()?;
            (Phase::Congested, v, pts)
        }
        Phase::Free | Phase::Boundary => {
            let pts = w
                .iter()
                .map(|&wi| p.flat_point(wi))
                .collect::<Result<Vec<_>>>()?;
            if phase == Phase::Boundary {
                let v = p.velocity(out)?;
                for (&wi, flat) in w.iter().zip(&pts) {
                    let sharp = p.sharp_point(wi, v)?;
                    debug_assert!(
                        sharp.approx_eq(flat, 1e-9),
                        "branches disagree on the phase boundary"
                    );
                }
            }
            (Phase::Free, p.v_max, pts)
        }
    };
    let sigma = s.sigma().to_vec();
    Ok(LimitSolution {
        outgoing: out,
        speed,
        averaged: weighted_average(&points, &sigma),
        branch,
        points,
        sigma,
        w_incoming: w,
    })
}

fn weighted_average(points: &[State], sigma: &[f64]) -> State {
    let total: f64 = sigma.iter().sum();
    let rho = sigma
        .iter()
        .zip(points)
        .map(|(s, q)| s * q.rho)
        .sum::<f64>()
        / total;
    let eta = sigma
        .iter()
        .zip(points)
        .map(|(s, q)| s * q.eta)
        .sum::<f64>()
        / total;
    State::new(rho, eta)
}

/// The maximal speed carried into the outgoing road.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveW {
    /// `η̃ / ρ̃`: the ratio of the averaged trace.
    pub ratio: f64,
    /// `Σ σ_i w̄_i / Σ σ_i`.
    pub simple: f64,
    /// Flux-weighted combination with weights `γ_i = σ_i ρ_i v_i`.
    pub flux_weighted: f64,
    /// Set when the averaged points have different densities, in which case
    /// the ratio and simple forms generally differ.
    pub discrepancy: bool,
}

/// Effective `w` of the limit trace at `x = 0+`.
pub fn effective_w_trace(p: &ModelParams, limit: &LimitSolution) -> EffectiveW {
    let total: f64 = limit.sigma.iter().sum();
    let simple = limit
        .sigma
        .iter()
        .zip(&limit.w_incoming)
        .map(|(s, w)| s * w)
        .sum::<f64>()
        / total;
    let gamma: Vec<f64> = limit
        .sigma
        .iter()
        .zip(&limit.points)
        .map(|(s, q)| s * q.rho * p.velocity_unchecked(*q))
        .collect();
    let flux_weighted = gamma
        .iter()
        .zip(&limit.w_incoming)
        .map(|(g, w)| g * w)
        .sum::<f64>()
        / gamma.iter().sum::<f64>();
    let (lo, hi) = limit
        .points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| {
            (lo.min(q.rho), hi.max(q.rho))
        });
    EffectiveW {
        ratio: limit.averaged.eta / limit.averaged.rho,
        simple,
        flux_weighted,
        discrepancy: hi - lo > 1e-12,
    }
}

fn trace_averages(sol: &RoadSolution, t0: f64, t1: f64) -> (f64, f64) {
    let (mut rho, mut eta) = (0.0, 0.0);
    for seg in sol.trace_history() {
        let len = seg.t_end.min(t1) - seg.t_start.max(t0);
        if len > 0.0 {
            rho += len * seg.state.rho;
            eta += len * seg.state.eta;
        }
    }
    (rho / (t1 - t0), eta / (t1 - t0))
}

/// Finite-`ℓ` effective `w` at time `t`: ratio of the cycle-averaged `η` and
/// `ρ` traces at `x = 0+` over the last complete cycle ending at or before `t`.
pub fn effective_w_trace_at(sol: &RoadSolution, schedule: &LightSchedule, t: f64) -> Result<f64> {
    let c = schedule.cycle_length();
    let k = ((t / c) * (1.0 + 1e-14)).floor();
    if k < 1.0 || t > schedule.horizon() * (1.0 + 1e-14) {
        return Err(Error::TimeOutOfRange {
            t,
            horizon: schedule.horizon(),
        });
    }
    let (rho, eta) = trace_averages(sol, (k - 1.0) * c, k * c);
    if rho <= 0.0 {
        return Err(Error::Vacuum);
    }
    Ok(eta / rho)
}

/// Mass flux balance at the junction over cycle `k`:
/// `|∫ Σ_i ρ_i v_i(t, 0-) dt - ∫ ρ v(t, 0+) dt|`, from the exact trace histories.
pub fn conservation_check(sim: &Simulation, cycle: usize) -> Result<f64> {
    let s = &sim.schedule;
    if cycle >= s.cycles() {
        return Err(Error::InvalidParameter(format!(
            "cycle {cycle} outside 0..{}",
            s.cycles()
        )));
    }
    let c = s.cycle_length();
    let (t0, t1) = (
        cycle as f64 * c,
        if cycle + 1 == s.cycles() {
            s.horizon()
        } else {
            (cycle + 1) as f64 * c
        },
    );
    let flux_integral = |sol: &RoadSolution| -> f64 {
        sol.trace_history()
            .iter()
            .map(|seg| {
                let len = seg.t_end.min(t1) - seg.t_start.max(t0);
                if len > 0.0 {
                    len * sim.params.flux(seg.state).0
                } else {
                    0.0
                }
            })
            .sum()
    };
    let n = s.roads();
    let inflow: f64 = (0..n).map(|i| flux_integral(sim.incoming(i))).sum();
    Ok((inflow - flux_integral(sim.outgoing())).abs())
}

/// Axis-aligned dyadic rectangles over `(0, T) x (0, x_max)`: `2^k x 2^k`
/// cells for `k = 1..=levels`.
pub fn dyadic_rectangles(horizon: f64, x_max: f64, levels: u32) -> Vec<Rect> {
    let mut out = Vec::new();
    for k in 1..=levels {
        let m = 1usize << k;
        for i in 0..m {
            for j in 0..m {
                out.push(Rect::new(
                    horizon * i as f64 / m as f64,
                    horizon * (i + 1) as f64 / m as f64,
                    x_max * j as f64 / m as f64,
                    x_max * (j + 1) as f64 / m as f64,
                ));
            }
        }
    }
    out
}

/// Largest pairing error `|∬ (u_ℓ - ũ) 1_R|` over the test rectangles, both
/// components.
pub fn weak_star_error(
    sol: &RoadSolution,
    limit: &LimitSolution,
    tests: &[Rect],
    exec: Execution,
) -> f64 {
    exec.map(tests, |r| {
        let [a, b] = spacetime::integrate(&[sol, limit], *r, |v| {
            [v[0].rho - v[1].rho, v[0].eta - v[1].eta]
        });
        a.abs().max(b.abs())
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// `‖u_ℓ - ũ‖_{L¹(region)}` for `(ρ, η)`.
pub fn l1_error(sol: &RoadSolution, limit: &LimitSolution, region: Rect) -> (f64, f64) {
    let [a, b] = spacetime::integrate(&[sol, limit], region, |v| {
        [(v[0].rho - v[1].rho).abs(), (v[0].eta - v[1].eta).abs()]
    });
    (a, b)
}

/// The compact set `[T/4, 3T/4] x [0, λT/4]`.
pub fn l1_region(horizon: f64, speed: f64) -> Rect {
    Rect::new(0.25 * horizon, 0.75 * horizon, 0.0, 0.25 * speed * horizon)
}

/// Least-squares fit of `log y = slope log x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::Study("slope fit needs at least 3 points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Study(
            "slope fit needs positive finite values".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub horizon: f64,
    pub dyadic_levels: u32,
    pub tracking: TrackingOptions,
    pub exec: Execution,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            horizon: 1.0,
            dyadic_levels: 3,
            tracking: TrackingOptions::default(),
            exec: Execution::Parallel,
        }
    }
}

/// Diagnostics of one `ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub ell: usize,
    pub events: usize,
    pub weak_star: f64,
    pub l1_rho: f64,
    pub l1_eta: f64,
    /// Area where the solution differs from the ideal stripe pattern.
    pub deviation: f64,
    /// Area where the solution takes a state foreign to the stripe pattern.
    pub transient: f64,
    /// Last time a foreign state is present, if ever.
    pub transient_end: Option<f64>,
    pub w_trace: f64,
    /// Largest per-cycle junction mass-balance residual.
    pub conservation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragingReport {
    pub ells: Vec<usize>,
    pub rows: Vec<std::result::Result<StudyRow, Error>>,
    pub limit: LimitSolution,
    pub w_limit: EffectiveW,
    pub region_area: f64,
    pub weak_star_fit: Option<SlopeFit>,
    pub l1_fit: Option<SlopeFit>,
    pub deviation_fit: Option<SlopeFit>,
    pub transient_fit: Option<SlopeFit>,
}

impl AveragingReport {
    pub fn ok_rows(&self) -> impl Iterator<Item = &StudyRow> {
        self.rows.iter().filter_map(|r| r.as_ref().ok())
    }
}

/// One exact run and all its diagnostics.
pub fn study_row(
    p: &ModelParams,
    init: &[State],
    sigma: &[f64],
    ell: usize,
    opts: &StudyOptions,
) -> Result<StudyRow> {
    let s = LightSchedule::build(opts.horizon, ell, sigma)?;
    let sim = tracking::simulate_with(p, &s, init, opts.tracking)?;
    let limit = closed_form_limit(p, &s, init)?;
    let pattern = StripePattern::for_junction(p, &s, init)?;
    let out = sim.outgoing();
    let tests = dyadic_rectangles(opts.horizon, limit.speed * opts.horizon, opts.dyadic_levels);
    let (l1_rho, l1_eta) = l1_error(out, &limit, l1_region(opts.horizon, limit.speed));
    let conservation = (0..ell)
        .map(|k| conservation_check(&sim, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(StudyRow {
        ell,
        events: sim.event_count(),
        weak_star: weak_star_error(out, &limit, &tests, opts.exec),
        l1_rho,
        l1_eta,
        deviation: tracking::deviation_set_measure(out, &pattern),
        transient: tracking::transient_measure(out, &pattern),
        transient_end: tracking::transient_end(out, &pattern),
        w_trace: effective_w_trace_at(out, &s, opts.horizon)?,
        conservation: conservation.into_iter().fold(0.0, f64::max),
    })
}

pub fn convergence_study(
    p: &ModelParams,
    init: &[State],
    sigma: &[f64],
    ells: &[usize],
    opts: &StudyOptions,
) -> Result<AveragingReport> {
    if ells.len() < 2 || ells.windows(2).any(|w| w[0] >= w[1]) || ells[0] == 0 {
        return Err(Error::Study(
            "ells must be positive, strictly increasing, with at least 2 entries".into(),
        ));
    }
    let s = LightSchedule::build(opts.horizon, ells[0], sigma)?;
    let limit = closed_form_limit(p, &s, init)?;
    let w_limit = effective_w_trace(p, &limit);
    let rows = opts
        .exec
        .map(ells, |&ell| study_row(p, init, sigma, ell, opts));

    let region_area = limit.speed * opts.horizon * opts.horizon;
    // Errors at round-off level are zero; a slope through them is noise.
    let floor = 1e-12 * region_area;
    let fit = |pick: &dyn Fn(&StudyRow) -> f64| -> Option<SlopeFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter_map(|r| r.as_ref().ok())
            .map(|r| (r.ell as f64, pick(r)))
            .unzip();
        if ys.iter().any(|&y| y <= floor) {
            return None;
        }
        fit_loglog(&xs, &ys).ok()
    };
    Ok(AveragingReport {
        ells: ells.to_vec(),
        weak_star_fit: fit(&|r| r.weak_star),
        l1_fit: fit(&|r| r.l1_rho + r.l1_eta),
        deviation_fit: fit(&|r| r.deviation),
        transient_fit: fit(&|r| r.transient),
        region_area,
        rows,
        limit,
        w_limit,
    })
}
