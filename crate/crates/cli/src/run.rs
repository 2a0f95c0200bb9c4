//! The five experiments. Each writes its CSV artifacts into the output
//! directory and returns a short human-readable summary.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use ptlight_core::homogenize::{convergence_study, SlopeFit, StudyOptions};
use ptlight_core::model::{ModelParams, Psi, State};
use ptlight_core::riemann;
use ptlight_core::tracking::{simulate_with, Orientation, RoadSolution};

use crate::cells;
use crate::csv::{num, Cell, Table};
use crate::scenario::{Experiment, Scenario};

pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

const STATE_COLUMNS: [&str; 3] = ["rho [veh/length]", "eta [veh/time]", "v [length/time]"];

fn state_cells(p: &ModelParams, s: State) -> Vec<Cell> {
    cells![s.rho, s.eta, p.velocity(s).ok()]
}

pub fn run(sc: &Scenario, experiment: Experiment, out: &Path) -> Result<Outcome> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut outcome = match experiment {
        Experiment::ValidateParams => validate_params(sc, out),
        Experiment::Schedule => schedule(sc, out),
        Experiment::SolveRiemann => solve_riemann(sc, out),
        Experiment::Simulate => simulate(sc, out),
        Experiment::Homogenize => homogenize(sc, out),
    }?;
    let path = out.join("scenario.json");
    let text = serde_json::to_string_pretty(&sc.to_json(experiment))?;
    std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    outcome.files.push(path);
    Ok(outcome)
}

fn psi_name(psi: &Psi) -> &'static str {
    match psi {
        Psi::Linear => "linear",
        Psi::Quadratic => "quadratic",
        Psi::Custom { .. } => "custom",
    }
}

fn validate_params(sc: &Scenario, out: &Path) -> Result<Outcome> {
    let p = &sc.params;
    let v = &sc.validation;
    let mut t = Table::new(&["quantity [-]", "value", "unit [-]"]);
    t.row(cells!["R", p.r, "veh/length"]);
    t.row(cells!["V_max", p.v_max, "length/time"]);
    t.row(cells!["w_check", p.w_check, "length/time"]);
    t.row(cells!["w_hat", p.w_hat, "length/time"]);
    t.row(cells!["psi", psi_name(&p.psi), "-"]);
    t.row(cells!["grid_n", v.grid_n, "-"]);
    t.row(cells!["h1_margin", v.h1_margin, "length/time"]);
    t.row(cells!["h2_max_psi_slope", v.h2_max_psi_slope, "length/veh"]);
    t.row(cells![
        "h2_max_flux_curvature",
        v.h2_max_flux_curvature,
        "length/veh"
    ]);
    t.row(cells!["h3_max_lambda1", v.h3_max_lambda1, "length/time"]);
    t.row(cells!["h3_worst_rho", v.h3_worst_sample.0, "veh/length"]);
    t.row(cells!["h3_worst_w", v.h3_worst_sample.1, "length/time"]);
    let file = t.write(out, "validation.csv")?;
    Ok(Outcome {
        files: vec![file],
        summary: format!(
            "H-1, H-2, H-3 hold (max lambda1 = {} on a {}x{} sample)",
            num(v.h3_max_lambda1),
            v.grid_n,
            v.grid_n
        ),
    })
}

fn needs<'a, T>(x: &'a Option<T>, what: &str) -> Result<&'a T> {
    x.as_ref()
        .with_context(|| format!("the scenario has no {what}"))
}

fn schedule(sc: &Scenario, out: &Path) -> Result<Outcome> {
    let s = needs(&sc.schedule, "schedule")?;
    let mut t = Table::new(&["interval [-]", "road [-]", "start [time]", "end [time]"]);
    for (k, iv) in s.intervals().iter().enumerate() {
        t.row(cells![k, iv.road + 1, iv.start, iv.end]);
    }
    let file = t.write(out, "schedule.csv")?;
    Ok(Outcome {
        files: vec![file],
        summary: format!(
            "{} green intervals over {} cycles of length {}",
            s.intervals().len(),
            s.cycles(),
            num(s.cycle_length())
        ),
    })
}

fn solve_riemann(sc: &Scenario, out: &Path) -> Result<Outcome> {
    let &(left, right) = needs(&sc.riemann, "Riemann data (riemann.left/right)")?;
    let sol = riemann::solve(&sc.params, left, right)?;
    let mut t = Table::new(&[
        "kind [-]",
        "left_rho [veh/length]",
        "left_eta [veh/time]",
        "right_rho [veh/length]",
        "right_eta [veh/time]",
        "speed_low [length/time]",
        "speed_high [length/time]",
    ]);
    for w in &sol.waves {
        t.row(cells![
            w.kind.as_str(),
            w.left.rho,
            w.left.eta,
            w.right.rho,
            w.right.eta,
            w.propagation.low(),
            w.propagation.high(),
        ]);
    }
    let file = t.write(out, "riemann.csv")?;
    Ok(Outcome {
        files: vec![file],
        summary: t.render(),
    })
}

fn road_label(sol: &RoadSolution, n: usize) -> usize {
    match sol.orientation {
        Orientation::Incoming(i) => i + 1,
        Orientation::Outgoing => n + 1,
    }
}

fn simulate(sc: &Scenario, out: &Path) -> Result<Outcome> {
    let p = &sc.params;
    let s = needs(&sc.schedule, "schedule")?;
    let init = needs(&sc.initial, "initial states")?;
    let sim = simulate_with(p, s, init, sc.tracking)?;
    let n = s.roads();
    let horizon = s.horizon();

    let mut fronts = Table::new(&[
        "road [-]",
        "t_start [time]",
        "t_end [time]",
        "x_start [length]",
        "speed [length/time]",
        "kind [-]",
        "left_rho [veh/length]",
        "left_eta [veh/time]",
        "right_rho [veh/length]",
        "right_eta [veh/time]",
    ]);
    for sol in &sim.roads {
        let road = road_label(sol, n);
        for f in sol.fronts_table() {
            fronts.row(cells![
                road,
                f.t_start,
                f.t_end,
                f.x_start,
                f.speed,
                f.kind.as_str(),
                f.left.rho,
                f.left.eta,
                f.right.rho,
                f.right.eta,
            ]);
        }
    }

    let mut events = Table::new(&["time [time]", "kind [-]", "road [-]", "x [length]"]);
    for e in &sim.events {
        events.row(cells![
            e.time,
            format!("{:?}", e.kind),
            e.road + 1,
            e.location
        ]);
    }

    let mut traces = Table::new(&[
        "road [-]",
        "t_start [time]",
        "t_end [time]",
        STATE_COLUMNS[0],
        STATE_COLUMNS[1],
        STATE_COLUMNS[2],
    ]);
    for sol in &sim.roads {
        let road = road_label(sol, n);
        for seg in sol.trace_history() {
            let mut row = cells![road, seg.t_start, seg.t_end];
            row.extend(state_cells(p, seg.state));
            traces.row(row);
        }
    }

    let (nt, nx) = sc.grid;
    let length = p.v_max * horizon;
    let mut grid = Table::new(&[
        "road [-]",
        "t [time]",
        "x [length]",
        STATE_COLUMNS[0],
        STATE_COLUMNS[1],
        STATE_COLUMNS[2],
        "phase [-]",
    ]);
    for sol in &sim.roads {
        let road = road_label(sol, n);
        for i in 0..nt {
            let t = horizon * i as f64 / (nt - 1) as f64;
            for j in 0..nx {
                let frac = length * j as f64 / (nx - 1) as f64;
                let x = match sol.orientation {
                    Orientation::Incoming(_) => -length + frac,
                    Orientation::Outgoing => frac,
                };
                let u = sol.eval(t, x)?;
                let mut row = cells![road, t, x];
                row.extend(state_cells(p, u));
                row.push(p.phase_of(u).map_or("vacuum", |ph| ph.as_str()).into());
                grid.row(row);
            }
        }
    }

    let files = vec![
        fronts.write(out, "fronts.csv")?,
        events.write(out, "events.csv")?,
        traces.write(out, "traces.csv")?,
        grid.write(out, "grid.csv")?,
    ];
    Ok(Outcome {
        files,
        summary: format!(
            "{} events, {} fronts on the outgoing road, grid {nt}x{nx} per road",
            sim.event_count(),
            sim.outgoing().fronts_table().len()
        ),
    })
}

fn fit_cells(name: &str, fit: &Option<SlopeFit>) -> [Vec<Cell>; 3] {
    [
        cells![format!("{name}_slope"), fit.map(|f| f.slope), "-"],
        cells![format!("{name}_intercept"), fit.map(|f| f.intercept), "-"],
        cells![format!("{name}_rms_residual"), fit.map(|f| f.residual), "-"],
    ]
}

fn homogenize(sc: &Scenario, out: &Path) -> Result<Outcome> {
    let p = &sc.params;
    let s = needs(&sc.schedule, "schedule")?;
    let init = needs(&sc.initial, "initial states")?;
    let opts = StudyOptions {
        horizon: s.horizon(),
        tracking: sc.tracking,
        ..StudyOptions::default()
    };
    let report = convergence_study(p, init, s.sigma(), &sc.ells, &opts)?;

    let mut rows = Table::new(&[
        "ell [-]",
        "status [-]",
        "events [-]",
        "weak_star [veh*time|veh*length]",
        "l1_rho [veh*time]",
        "l1_eta [veh*length]",
        "deviation [length*time]",
        "transient [length*time]",
        "transient_end [time]",
        "w_trace [length/time]",
        "conservation [veh]",
    ]);
    for (ell, row) in report.ells.iter().zip(&report.rows) {
        match row {
            Ok(r) => rows.row(cells![
                r.ell,
                "ok",
                r.events,
                r.weak_star,
                r.l1_rho,
                r.l1_eta,
                r.deviation,
                r.transient,
                r.transient_end,
                r.w_trace,
                r.conservation,
            ]),
            Err(e) => {
                let mut cells = cells![*ell, format!("error: {e}")];
                cells.extend((0..9).map(|_| Cell::Empty));
                rows.row(cells);
            }
        }
    }

    let lim = &report.limit;
    let w = &report.w_limit;
    let (rh_rho, rh_eta) = lim.rh_residual(p);
    let mut summary = Table::new(&["quantity [-]", "value", "unit [-]"]);
    summary.row(cells!["branch", lim.branch.as_str(), "-"]);
    summary.row(cells!["speed", lim.speed, "length/time"]);
    summary.row(cells!["limit_rho", lim.averaged.rho, "veh/length"]);
    summary.row(cells!["limit_eta", lim.averaged.eta, "veh/time"]);
    summary.row(cells!["w_ratio", w.ratio, "length/time"]);
    summary.row(cells!["w_simple", w.simple, "length/time"]);
    summary.row(cells!["w_flux_weighted", w.flux_weighted, "length/time"]);
    summary.row(cells!["w_discrepancy", w.discrepancy.to_string(), "-"]);
    summary.row(cells!["lead_rh_residual_rho", rh_rho, "veh/time"]);
    summary.row(cells!["lead_rh_residual_eta", rh_eta, "veh*length/time^2"]);
    summary.row(cells!["region_area", report.region_area, "length*time"]);
    for (name, fit) in [
        ("weak_star", &report.weak_star_fit),
        ("l1", &report.l1_fit),
        ("deviation", &report.deviation_fit),
        ("transient", &report.transient_fit),
    ] {
        for row in fit_cells(name, fit) {
            summary.row(row);
        }
    }

    let files = vec![
        rows.write(out, "report.csv")?,
        summary.write(out, "summary.csv")?,
    ];
    let slope = |f: &Option<SlopeFit>| f.map_or("n/a".to_string(), |f| format!("{:.3}", f.slope));
    Ok(Outcome {
        files,
        summary: format!(
            "{} branch, limit (rho, eta) = ({}, {}), w = {}; slopes: weak-* {}, L1 {}, deviation {}, transient {}; {}/{} runs ok",
            lim.branch.as_str(),
            num(lim.averaged.rho),
            num(lim.averaged.eta),
            num(w.ratio),
            slope(&report.weak_star_fit),
            slope(&report.l1_fit),
            slope(&report.deviation_fit),
            slope(&report.transient_fit),
            report.ok_rows().count(),
            report.rows.len()
        ),
    })
}
