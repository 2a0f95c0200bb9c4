//! Scenario files: one JSON document describing parameters, light schedule,
//! initial data and what to run.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ptlight_core::model::{ModelParams, Psi, State, ValidationReport};
use ptlight_core::{LightSchedule, TrackingOptions};

/// Sample count per axis used when checking H-2/H-3 at load time.
pub const VALIDATION_GRID: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ValidateParams,
    Schedule,
    SolveRiemann,
    Simulate,
    Homogenize,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ParamsSpec {
    Preset(String),
    Explicit {
        r: f64,
        v_max: f64,
        w_check: f64,
        w_hat: f64,
        psi: PsiSpec,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum PsiSpec {
    Linear,
    Quadratic,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleSpec {
    horizon: f64,
    cycles: usize,
    sigma: Vec<f64>,
}

/// A state given either by its conserved variables or as the congested point
/// with maximal speed `w` moving at speed `v` (the flat point when `v = V_max`).
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum StateSpec {
    Conserved { rho: f64, eta: f64 },
    Speeds { w: f64, v: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RiemannSpec {
    left: StateSpec,
    right: StateSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    params: ParamsSpec,
    schedule: Option<ScheduleSpec>,
    initial: Option<Vec<StateSpec>>,
    experiment: Option<Experiment>,
    out: Option<PathBuf>,
    grid: Option<(usize, usize)>,
    ells: Option<Vec<usize>>,
    riemann: Option<RiemannSpec>,
    fan_pieces: Option<usize>,
}

/// A loaded and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: ModelParams,
    pub validation: ValidationReport,
    pub schedule: Option<LightSchedule>,
    /// Incoming roads first, outgoing road last.
    pub initial: Option<Vec<State>>,
    pub experiment: Option<Experiment>,
    pub out: Option<PathBuf>,
    /// Time nodes by space nodes per road.
    pub grid: (usize, usize),
    pub ells: Vec<usize>,
    pub riemann: Option<(State, State)>,
    pub tracking: TrackingOptions,
}

pub fn preset(name: &str) -> Result<ModelParams> {
    match name {
        "p0" | "P0" => Ok(ModelParams::p0()),
        other => bail!("unknown preset {other:?} (available: p0)"),
    }
}

impl Scenario {
    /// A scenario holding only the named parameter preset.
    pub fn from_preset(name: &str) -> Result<Self> {
        let params = preset(name)?;
        Scenario::with_params(params)
    }

    fn with_params(params: ModelParams) -> Result<Self> {
        let validation = params
            .validate(VALIDATION_GRID)
            .context("params: hypothesis check failed")?;
        Ok(Scenario {
            params,
            validation,
            schedule: None,
            initial: None,
            experiment: None,
            out: None,
            grid: (101, 101),
            ells: vec![4, 8, 16, 32],
            riemann: None,
            tracking: TrackingOptions::default(),
        })
    }

    /// Replace the parameters, re-validating the states that depend on them.
    pub fn set_params(&mut self, params: ModelParams) -> Result<()> {
        let validation = params
            .validate(VALIDATION_GRID)
            .context("params: hypothesis check failed")?;
        for s in self.initial.iter().flatten() {
            params
                .check_state(*s)
                .context("initial: state invalid under the new parameters")?;
        }
        self.params = params;
        self.validation = validation;
        Ok(())
    }

    pub fn roads(&self) -> Option<usize> {
        self.schedule.as_ref().map(|s| s.roads())
    }

    /// The resolved scenario in file form; loading it reproduces this one.
    pub fn to_json(&self, experiment: Experiment) -> serde_json::Value {
        use serde_json::json;
        let p = &self.params;
        let st = |s: &State| json!({ "rho": s.rho, "eta": s.eta });
        let mut v = json!({
            "params": {
                "r": p.r,
                "v_max": p.v_max,
                "w_check": p.w_check,
                "w_hat": p.w_hat,
                "psi": match p.psi {
                    Psi::Quadratic => "quadratic",
                    _ => "linear",
                },
            },
            "experiment": experiment,
            "grid": [self.grid.0, self.grid.1],
            "ells": self.ells,
            "fan_pieces": self.tracking.fan_pieces,
        });
        if let Some(s) = &self.schedule {
            v["schedule"] = json!({
                "horizon": s.horizon(),
                "cycles": s.cycles(),
                "sigma": s.sigma(),
            });
        }
        if let Some(init) = &self.initial {
            v["initial"] = init.iter().map(st).collect();
        }
        if let Some((l, r)) = &self.riemann {
            v["riemann"] = json!({ "left": st(l), "right": st(r) });
        }
        v
    }
}

fn state(p: &ModelParams, spec: StateSpec, field: &str) -> Result<State> {
    let s = match spec {
        StateSpec::Conserved { rho, eta } => State::new(rho, eta),
        StateSpec::Speeds { w, v } => p
            .sharp_point(w, v)
            .with_context(|| format!("{field}: no state with w={w}, v={v}"))?,
    };
    p.check_state(s)
        .with_context(|| format!("{field}: invalid state"))?;
    Ok(s)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).context("malformed scenario")?;
    let params = match file.params {
        ParamsSpec::Preset(name) => preset(&name).context("params")?,
        ParamsSpec::Explicit {
            r,
            v_max,
            w_check,
            w_hat,
            psi,
        } => {
            let psi = match psi {
                PsiSpec::Linear => Psi::Linear,
                PsiSpec::Quadratic => Psi::Quadratic,
            };
            ModelParams::new(r, v_max, w_check, w_hat, psi)
                .context("params (r, v_max, w_check, w_hat)")?
        }
    };
    let mut sc = Scenario::with_params(params)?;
    let p = sc.params;

    if let Some(s) = file.schedule {
        sc.schedule = Some(
            LightSchedule::build(s.horizon, s.cycles, &s.sigma)
                .context("schedule (horizon, cycles, sigma)")?,
        );
    }
    if let Some(init) = file.initial {
        let states = init
            .into_iter()
            .enumerate()
            .map(|(i, spec)| state(&p, spec, &format!("initial[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        if let Some(n) = sc.roads() {
            if states.len() != n + 1 {
                bail!(
                    "initial: {} states given, the schedule has {n} incoming roads plus the outgoing one",
                    states.len()
                );
            }
        }
        sc.initial = Some(states);
    }
    if let Some(r) = file.riemann {
        sc.riemann = Some((
            state(&p, r.left, "riemann.left")?,
            state(&p, r.right, "riemann.right")?,
        ));
    }
    if let Some(g) = file.grid {
        sc.grid = check_grid(g).context("grid")?;
    }
    if let Some(ells) = file.ells {
        sc.ells = check_ells(ells).context("ells")?;
    }
    if let Some(m) = file.fan_pieces {
        if m == 0 {
            bail!("fan_pieces: must be at least 1");
        }
        sc.tracking.fan_pieces = m;
    }
    sc.experiment = file.experiment;
    sc.out = file.out;
    Ok(sc)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_scenario(&text).with_context(|| format!("loading {}", path.display()))
}

pub fn check_grid((nt, nx): (usize, usize)) -> Result<(usize, usize)> {
    if nt < 2 || nx < 2 {
        bail!("need at least 2 nodes per axis, got {nt}x{nx}");
    }
    Ok((nt, nx))
}

pub fn check_ells(ells: Vec<usize>) -> Result<Vec<usize>> {
    if ells.len() < 2 || ells[0] == 0 || ells.windows(2).any(|w| w[0] >= w[1]) {
        bail!("need at least two positive, strictly increasing values, got {ells:?}");
    }
    Ok(ells)
}

/// `"NxM"` as (time nodes, space nodes).
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .with_context(|| format!("grid {s:?} is not of the form NxM"))?;
    check_grid((a.trim().parse()?, b.trim().parse()?))
}

/// `"rho,eta"`.
pub fn parse_state(s: &str) -> Result<State> {
    let (a, b) = s
        .split_once(',')
        .with_context(|| format!("state {s:?} is not of the form rho,eta"))?;
    Ok(State::new(a.trim().parse()?, b.trim().parse()?))
}
