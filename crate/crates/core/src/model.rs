//! Parameters, state space and eigenstructure of the two-phase model
//!
//! ```text
//! rho_t + (rho v)_x = 0,    eta_t + (eta v)_x = 0,    v = min{V_max, (eta/rho) psi(rho)}
//! ```
//!
//! States live in the cone `w_check rho <= eta <= w_hat rho`; the free phase is
//! where the speed saturates at `V_max`, the congested phase where it does not.

use crate::error::{Error, Hypothesis, Result};

/// Relative tolerance used to tag a state as lying on `F ∩ C`.
pub const TOL_PHASE: f64 = 1e-9;

/// Residual tolerance for the monotone root finders.
pub const TOL_ROOT: f64 = 1e-12;

/// Slack allowed on the cone constraints when validating states.
const TOL_CONE: f64 = 1e-12;

/// Speed profile `psi` on `[0, R]`.
///
/// `Custom` carries three plain functions: `psi`, `psi'` and `(rho psi)''`.
/// They are only ever checked numerically (see [`ModelParams::validate`]).
#[derive(Clone, Copy)]
pub enum Psi {
    /// `psi(rho) = 1 - rho/R`
    Linear,
    /// `psi(rho) = 1 - (rho/R)^2`
    Quadratic,
    Custom {
        value: fn(f64) -> f64,
        derivative: fn(f64) -> f64,
        flux_curvature: fn(f64) -> f64,
    },
}

impl std::fmt::Debug for Psi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Psi::Linear => f.write_str("Linear"),
            Psi::Quadratic => f.write_str("Quadratic"),
            Psi::Custom { .. } => f.write_str("Custom"),
        }
    }
}

impl PartialEq for Psi {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Psi::Linear, Psi::Linear) | (Psi::Quadratic, Psi::Quadratic) => true,
            (
                Psi::Custom {
                    value: a,
                    derivative: b,
                    flux_curvature: c,
                },
                Psi::Custom {
                    value: x,
                    derivative: y,
                    flux_curvature: z,
                },
            ) => {
                std::ptr::fn_addr_eq(*a, *x)
                    && std::ptr::fn_addr_eq(*b, *y)
                    && std::ptr::fn_addr_eq(*c, *z)
            }
            _ => false,
        }
    }
}

impl Psi {
    pub fn value(&self, r: f64, rho: f64) -> f64 {
        match self {
            Psi::Linear => 1.0 - rho / r,
            Psi::Quadratic => {
                let s = rho / r;
                1.0 - s * s
            }
            Psi::Custom { value, .. } => value(rho),
        }
    }

    pub fn derivative(&self, r: f64, rho: f64) -> f64 {
        match self {
            Psi::Linear => -1.0 / r,
            Psi::Quadratic => -2.0 * rho / (r * r),
            Psi::Custom { derivative, .. } => derivative(rho),
        }
    }

    /// `(rho psi(rho))''`
    pub fn flux_curvature(&self, r: f64, rho: f64) -> f64 {
        match self {
            Psi::Linear => -2.0 / r,
            Psi::Quadratic => -6.0 * rho / (r * r),
            Psi::Custom { flux_curvature, .. } => flux_curvature(rho),
        }
    }

    /// `(rho psi(rho))' = psi + rho psi'`
    pub fn flux_slope(&self, r: f64, rho: f64) -> f64 {
        match self {
            Psi::Linear => 1.0 - 2.0 * rho / r,
            Psi::Quadratic => {
                let s = rho / r;
                1.0 - 3.0 * s * s
            }
            Psi::Custom { .. } => self.value(r, rho) + rho * self.derivative(r, rho),
        }
    }

    /// Closed-form inverse of `psi` on `[0, R]` when one exists.
    fn inverse(&self, r: f64, level: f64) -> Option<f64> {
        match self {
            Psi::Linear => Some(r * (1.0 - level)),
            Psi::Quadratic => Some(r * (1.0 - level).max(0.0).sqrt()),
            Psi::Custom { .. } => None,
        }
    }

    /// Closed-form inverse of `(rho psi)'` when one exists.
    fn flux_slope_inverse(&self, r: f64, level: f64) -> Option<f64> {
        match self {
            Psi::Linear => Some(0.5 * r * (1.0 - level)),
            Psi::Quadratic => Some(r * ((1.0 - level) / 3.0).max(0.0).sqrt()),
            Psi::Custom { .. } => None,
        }
    }
}

/// Phase tag of a state. `Boundary` is `F ∩ C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Free,
    Congested,
    Boundary,
}

impl Phase {
    pub fn is_free(self) -> bool {
        matches!(self, Phase::Free | Phase::Boundary)
    }

    pub fn is_congested(self) -> bool {
        matches!(self, Phase::Congested | Phase::Boundary)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Free => "free",
            Phase::Congested => "congested",
            Phase::Boundary => "boundary",
        }
    }
}

/// A point `(rho, eta)` of the state space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub rho: f64,
    pub eta: f64,
}

impl State {
    pub const VACUUM: State = State { rho: 0.0, eta: 0.0 };

    pub const fn new(rho: f64, eta: f64) -> Self {
        State { rho, eta }
    }

    /// State on the ray of maximal speed `w` with density `rho`.
    pub fn on_ray(w: f64, rho: f64) -> Self {
        State { rho, eta: w * rho }
    }

    pub fn is_vacuum(&self) -> bool {
        self.rho == 0.0
    }

    /// Maximal speed `w = eta / rho`.
    pub fn w(&self) -> Result<f64> {
        if self.rho == 0.0 {
            Err(Error::Vacuum)
        } else {
            Ok(self.eta / self.rho)
        }
    }

    /// Componentwise comparison with a tolerance relative to the magnitude.
    pub fn approx_eq(&self, other: &State, tol: f64) -> bool {
        let scale_r = 1.0_f64.max(self.rho.abs()).max(other.rho.abs());
        let scale_e = 1.0_f64.max(self.eta.abs()).max(other.eta.abs());
        (self.rho - other.rho).abs() <= tol * scale_r
            && (self.eta - other.eta).abs() <= tol * scale_e
    }
}

/// Outcome of [`ModelParams::validate`]: the worst margin seen for each hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub grid_n: usize,
    /// `min(w_check - V_max, w_hat - w_check)`
    pub h1_margin: f64,
    /// Largest value of `psi'` on the grid (must be `<= 0`).
    pub h2_max_psi_slope: f64,
    /// Largest value of `(rho psi)''` on the grid (must be `<= 0`).
    pub h2_max_flux_curvature: f64,
    /// Largest first-family eigenvalue sampled over `C`, with its location `(rho, w)`.
    pub h3_max_lambda1: f64,
    pub h3_worst_sample: (f64, f64),
}

/// Model parameters `(R, V_max, w_check, w_hat, psi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub r: f64,
    pub v_max: f64,
    pub w_check: f64,
    pub w_hat: f64,
    pub psi: Psi,
}

impl ModelParams {
    /// Build a parameter set, checking H-1 and basic finiteness. Use
    /// [`validate`](Self::validate) for the sampled H-2/H-3 checks.
    pub fn new(r: f64, v_max: f64, w_check: f64, w_hat: f64, psi: Psi) -> Result<Self> {
        let p = ModelParams {
            r,
            v_max,
            w_check,
            w_hat,
            psi,
        };
        p.check_speed_ordering()?;
        Ok(p)
    }

    /// The default preset: `R = 1, V_max = 1, w_check = 2.5, w_hat = 3, psi = 1 - rho`.
    pub fn p0() -> Self {
        ModelParams {
            r: 1.0,
            v_max: 1.0,
            w_check: 2.5,
            w_hat: 3.0,
            psi: Psi::Linear,
        }
    }

    fn check_speed_ordering(&self) -> Result<()> {
        let vals = [self.r, self.v_max, self.w_check, self.w_hat];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        let ok = self.r > 0.0
            && self.v_max > 0.0
            && self.v_max < self.w_check
            && self.w_check < self.w_hat;
        if !ok {
            return Err(Error::HypothesisViolated {
                hypothesis: Hypothesis::SpeedOrdering,
                rho: f64::NAN,
                w: f64::NAN,
                value: (self.w_check - self.v_max).min(self.w_hat - self.w_check),
                detail: format!(
                    "need R > 0 and 0 < V_max < w_check < w_hat, got R={}, V_max={}, w_check={}, w_hat={}",
                    self.r, self.v_max, self.w_check, self.w_hat
                ),
            });
        }
        Ok(())
    }

    pub fn psi(&self, rho: f64) -> f64 {
        self.psi.value(self.r, rho)
    }

    pub fn psi_prime(&self, rho: f64) -> f64 {
        self.psi.derivative(self.r, rho)
    }

    /// Check that `s` lies in `F ∪ C`.
    pub fn check_state(&self, s: State) -> Result<()> {
        let bad = |reason| {
            Err(Error::InvalidState {
                rho: s.rho,
                eta: s.eta,
                reason,
            })
        };
        if !s.rho.is_finite() || !s.eta.is_finite() {
            return bad("non-finite component");
        }
        if s.rho < 0.0 || s.rho > self.r * (1.0 + TOL_CONE) {
            return bad("density outside [0, R]");
        }
        if s.rho == 0.0 {
            if s.eta != 0.0 {
                return bad("vacuum must have eta = 0");
            }
            return Ok(());
        }
        let w = s.eta / s.rho;
        if w < self.w_check * (1.0 - TOL_CONE) || w > self.w_hat * (1.0 + TOL_CONE) {
            return bad("maximal speed eta/rho outside [w_check, w_hat]");
        }
        Ok(())
    }

    /// `v(rho, eta) = min{V_max, w psi(rho)}`, with `v = V_max` at vacuum.
    pub fn velocity(&self, s: State) -> Result<f64> {
        self.check_state(s)?;
        Ok(self.velocity_unchecked(s))
    }

    pub(crate) fn velocity_unchecked(&self, s: State) -> f64 {
        if s.rho == 0.0 {
            return self.v_max;
        }
        let congested = s.eta / s.rho * self.psi(s.rho);
        self.v_max.min(congested.max(0.0))
    }

    /// Flux `(rho v, eta v)`.
    pub fn flux(&self, s: State) -> (f64, f64) {
        let v = self.velocity_unchecked(s);
        (s.rho * v, s.eta * v)
    }

    pub fn phase_of(&self, s: State) -> Result<Phase> {
        self.check_state(s)?;
        Ok(self.phase_unchecked(s))
    }

    pub(crate) fn phase_unchecked(&self, s: State) -> Phase {
        if s.rho == 0.0 {
            return Phase::Free;
        }
        let gap = s.eta / s.rho * self.psi(s.rho) - self.v_max;
        if gap.abs() <= TOL_PHASE * self.v_max {
            Phase::Boundary
        } else if gap > 0.0 {
            Phase::Free
        } else {
            Phase::Congested
        }
    }

    /// First characteristic speed `eta psi'(rho) + v` evaluated with the
    /// congested-phase velocity; equals `w (rho psi)'` on the ray of speed `w`.
    pub fn lambda1(&self, s: State) -> f64 {
        let w = s.eta / s.rho;
        w * self.psi.flux_slope(self.r, s.rho)
    }

    /// Eigenvalues and right eigenvectors. Only defined on `C` (including its
    /// free boundary) with `rho > 0`.
    pub fn eigen(&self, s: State) -> Result<Eigen> {
        self.check_state(s)?;
        if s.rho == 0.0 {
            return Err(Error::Vacuum);
        }
        if self.phase_unchecked(s) == Phase::Free {
            return Err(Error::NotStrictlyHyperbolic);
        }
        let v = self.velocity_unchecked(s);
        let psi = self.psi(s.rho);
        let dpsi = self.psi_prime(s.rho);
        let r2 = if psi > 0.0 {
            [1.0, s.eta * (1.0 / s.rho - dpsi / psi)]
        } else {
            [0.0, 1.0]
        };
        Ok(Eigen {
            lambda1: s.eta * dpsi + v,
            lambda2: v,
            r1: [-s.rho, -s.eta],
            r2,
        })
    }

    /// Lax curves through `origin`, evaluated at density `rho`.
    pub fn lax_curves(&self, origin: State, rho: f64) -> Result<LaxCurves> {
        self.check_state(origin)?;
        if origin.rho == 0.0 {
            return Err(Error::Vacuum);
        }
        if !(rho > 0.0 && rho <= self.r) {
            return Err(Error::InvalidParameter(format!(
                "density {rho} outside (0, R]"
            )));
        }
        if !self.phase_unchecked(origin).is_congested() {
            return Err(Error::NotStrictlyHyperbolic);
        }
        let first = origin.eta * rho / origin.rho;
        let second = if origin.rho >= self.r {
            SecondLaxCurve::VerticalSegment {
                eta_min: self.r * self.w_check,
                eta_max: self.r * self.w_hat,
            }
        } else {
            let v_o = self.velocity_unchecked(origin);
            let psi = self.psi(rho);
            if psi <= 0.0 {
                if v_o > 0.0 {
                    return Err(Error::DegenerateCurve(
                        "the 2-curve of a moving state never reaches rho = R",
                    ));
                }
                SecondLaxCurve::VerticalSegment {
                    eta_min: self.r * self.w_check,
                    eta_max: self.r * self.w_hat,
                }
            } else {
                SecondLaxCurve::Eta(rho * v_o / psi)
            }
        };
        Ok(LaxCurves { first, second })
    }

    /// The congested state with maximal speed `w` and velocity `v_target`.
    pub fn sharp_point(&self, w: f64, v_target: f64) -> Result<State> {
        self.check_w(w)?;
        if !(0.0..=self.v_max).contains(&v_target) {
            return Err(Error::Infeasible { w, v_target });
        }
        let level = v_target / w;
        let rho = match self.psi.inverse(self.r, level) {
            Some(rho) => rho.clamp(0.0, self.r),
            None => self.bisect_decreasing(|rho| w * self.psi(rho) - v_target)?,
        };
        if rho <= 0.0 {
            return Err(Error::Infeasible { w, v_target });
        }
        Ok(State::on_ray(w, rho))
    }

    /// The `F ∩ C` state with maximal speed `w`.
    pub fn flat_point(&self, w: f64) -> Result<State> {
        self.sharp_point(w, self.v_max)
    }

    /// Density on the ray of speed `w` whose first eigenvalue equals `xi`,
    /// clamped to `[rho_lo, rho_hi]`.
    pub(crate) fn rho_for_lambda1(&self, w: f64, xi: f64, rho_lo: f64, rho_hi: f64) -> f64 {
        let level = xi / w;
        let rho = match self.psi.flux_slope_inverse(self.r, level) {
            Some(rho) => rho,
            None => {
                let g = |rho: f64| w * self.psi.flux_slope(self.r, rho) - xi;
                let (mut a, mut b) = (rho_lo, rho_hi);
                if g(a) <= 0.0 {
                    return a;
                }
                if g(b) >= 0.0 {
                    return b;
                }
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    if g(m) > 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            }
        };
        rho.clamp(rho_lo, rho_hi)
    }

    fn check_w(&self, w: f64) -> Result<()> {
        let lo = self.w_check * (1.0 - TOL_CONE);
        let hi = self.w_hat * (1.0 + TOL_CONE);
        if !(w >= lo && w <= hi) {
            return Err(Error::InvalidParameter(format!(
                "maximal speed {w} outside [{}, {}]",
                self.w_check, self.w_hat
            )));
        }
        Ok(())
    }

    /// Bisection for the root of a non-increasing `g` on `(0, R]`.
    fn bisect_decreasing(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let (mut a, mut b) = (0.0, self.r);
        if g(b) > 0.0 {
            return Err(Error::Infeasible {
                w: f64::NAN,
                v_target: f64::NAN,
            });
        }
        if g(b) == 0.0 {
            return Ok(b);
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let gm = g(m);
            if gm.abs() <= TOL_ROOT * 1e-3 || m <= a || m >= b {
                return Ok(m);
            }
            if gm > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Check H-1 exactly and H-2/H-3 on a `grid_n x grid_n` sample.
    ///
    /// H-3 is sampled over the rectangle `w in [w_check, w_hat]`,
    /// `rho in [rho_flat(w), R]`, which covers `C`.
    pub fn validate(&self, grid_n: usize) -> Result<ValidationReport> {
        if grid_n < 2 {
            return Err(Error::InvalidParameter(
                "validation grid needs at least 2 points".into(),
            ));
        }
        self.check_speed_ordering()?;
        let r = self.r;
        let h2 = |rho: f64, w: f64, value: f64, detail: String| Error::HypothesisViolated {
            hypothesis: Hypothesis::ProfileShape,
            rho,
            w,
            value,
            detail,
        };
        let psi0 = self.psi(0.0);
        if (psi0 - 1.0).abs() > 1e-12 {
            return Err(h2(0.0, f64::NAN, psi0, "psi(0) must equal 1".into()));
        }
        let psir = self.psi(r);
        if psir.abs() > 1e-12 {
            return Err(h2(r, f64::NAN, psir, "psi(R) must equal 0".into()));
        }
        let mut max_slope = f64::NEG_INFINITY;
        let mut max_curv = f64::NEG_INFINITY;
        for k in 0..grid_n {
            // interior samples of (0, R)
            let rho = r * (k as f64 + 0.5) / grid_n as f64;
            let value = self.psi(rho);
            if !(-1e-12..=1.0 + 1e-12).contains(&value) {
                return Err(h2(rho, f64::NAN, value, "psi must map into [0, 1]".into()));
            }
            let slope = self.psi_prime(rho);
            let curv = self.psi.flux_curvature(r, rho);
            if slope > 1e-12 {
                return Err(h2(rho, f64::NAN, slope, "psi' must be non-positive".into()));
            }
            if curv > 1e-12 {
                return Err(h2(
                    rho,
                    f64::NAN,
                    curv,
                    "(rho psi)'' must be non-positive".into(),
                ));
            }
            max_slope = max_slope.max(slope);
            max_curv = max_curv.max(curv);
        }

        let mut worst = f64::NEG_INFINITY;
        let mut worst_at = (f64::NAN, f64::NAN);
        for i in 0..grid_n {
            let w = self.w_check + (self.w_hat - self.w_check) * i as f64 / (grid_n - 1) as f64;
            let rho_flat = self.flat_point(w)?.rho;
            for j in 0..grid_n {
                let rho = rho_flat + (r - rho_flat) * j as f64 / (grid_n - 1) as f64;
                let lambda1 = w * self.psi.flux_slope(r, rho);
                if lambda1 > worst {
                    worst = lambda1;
                    worst_at = (rho, w);
                }
            }
        }
        if worst >= 0.0 {
            return Err(Error::HypothesisViolated {
                hypothesis: Hypothesis::NegativeFirstFamily,
                rho: worst_at.0,
                w: worst_at.1,
                value: worst,
                detail: "first-family eigenvalue must be negative on C".into(),
            });
        }
        Ok(ValidationReport {
            grid_n,
            h1_margin: (self.w_check - self.v_max).min(self.w_hat - self.w_check),
            h2_max_psi_slope: max_slope,
            h2_max_flux_curvature: max_curv,
            h3_max_lambda1: worst,
            h3_worst_sample: worst_at,
        })
    }
}

/// Eigenvalues and right eigenvectors of the flux Jacobian on `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen {
    pub lambda1: f64,
    pub lambda2: f64,
    pub r1: [f64; 2],
    pub r2: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SecondLaxCurve {
    Eta(f64),
    /// The degenerate 2-curve through a state with `rho = R`.
    VerticalSegment {
        eta_min: f64,
        eta_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaxCurves {
    pub first: f64,
    pub second: SecondLaxCurve,
}
