use std::path::{Path, PathBuf};
use std::process::Command;

use ptlight_cli::{load_scenario, parse_scenario, run, Experiment};
use ptlight_core::tracking::simulate_with;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn ptlight(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ptlight"))
        .args(args)
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn saved_scenario_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let mut sc = load_scenario(&scenarios().join("congested.json")).unwrap();
    sc.grid = (21, 17);
    run(&sc, Experiment::Simulate, &a).unwrap();
    let again = load_scenario(&a.join("scenario.json")).unwrap();
    assert_eq!(again.params, sc.params);
    assert_eq!(again.initial, sc.initial);
    assert_eq!(again.schedule, sc.schedule);
    assert_eq!(again.grid, (21, 17));
    run(&again, Experiment::Simulate, &b).unwrap();
    for f in [
        "fronts.csv",
        "events.csv",
        "traces.csv",
        "grid.csv",
        "scenario.json",
    ] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
}

#[test]
fn grid_nodes_hold_exact_solution_values() {
    let tmp = tempfile::tempdir().unwrap();
    let mut sc = load_scenario(&scenarios().join("congested.json")).unwrap();
    sc.grid = (9, 7);
    run(&sc, Experiment::Simulate, tmp.path()).unwrap();
    let sim = simulate_with(
        &sc.params,
        sc.schedule.as_ref().unwrap(),
        sc.initial.as_ref().unwrap(),
        sc.tracking,
    )
    .unwrap();
    let grid = read(tmp.path(), "grid.csv");
    let mut lines = grid.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("road [-],t [time],x [length]"));
    let mut count = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let road: usize = f[0].parse().unwrap();
        let (t, x): (f64, f64) = (f[1].parse().unwrap(), f[2].parse().unwrap());
        let u = sim.roads[road - 1].eval(t, x).unwrap();
        assert_eq!(f[3].parse::<f64>().unwrap(), u.rho);
        assert_eq!(f[4].parse::<f64>().unwrap(), u.eta);
        count += 1;
    }
    assert_eq!(count, 3 * 9 * 7);
}

#[test]
fn homogenize_writes_one_row_per_ell() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenarios().join("free_outgoing.json");
    let out = ptlight(&[
        "homogenize",
        "--config",
        cfg.to_str().unwrap(),
        "--ells",
        "4,8,16",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = read(tmp.path(), "report.csv");
    assert_eq!(report.lines().count(), 4);
    assert!(report
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(1) == Some("ok")));
    let summary = read(tmp.path(), "summary.csv");
    assert!(summary.contains("branch,free,-"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenarios().join("free_inflow.json");
    let dirs = [tmp.path().join("1"), tmp.path().join("2")];
    for d in &dirs {
        let out = ptlight(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    for f in ["report.csv", "summary.csv"] {
        assert_eq!(read(&dirs[0], f), read(&dirs[1], f));
    }
}

#[test]
fn validation_alone_runs_no_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ptlight(&[
        "validate-params",
        "--preset",
        "p0",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mut names: Vec<String> = std::fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["scenario.json", "validation.csv"]);
}

#[test]
fn riemann_flags_print_the_waves() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ptlight(&[
        "solve-riemann",
        "--preset",
        "p0",
        "--left",
        "0.8,2.0",
        "--right",
        "0.9,2.7",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .take_while(|l| !l.starts_with("wrote"))
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("shock1,"));
    assert!(rows[2].starts_with("contact2,"));
    let speed: f64 = rows[1].split(',').nth(5).unwrap().parse().unwrap();
    assert!((speed + 1.7).abs() < 1e-12);
}

fn failure(json: &str) -> (String, String) {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, json).unwrap();
    let out = ptlight(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(!tmp.path().join("out").exists());
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    (
        record["error"].as_str().unwrap().to_string(),
        record["message"].as_str().unwrap().to_string(),
    )
}

#[test]
fn speed_ordering_violation_names_the_fields() {
    let (kind, msg) = failure(
        r#"{"params": {"r": 1, "v_max": 3, "w_check": 2.5, "w_hat": 3, "psi": "linear"},
            "experiment": "validate-params"}"#,
    );
    assert_eq!(kind, "hypothesis_violated");
    assert!(msg.contains("H-1"), "{msg}");
    assert!(
        msg.contains("V_max=3") && msg.contains("w_check=2.5"),
        "{msg}"
    );
}

#[test]
fn green_ratios_must_end_with_one() {
    let (kind, msg) = failure(
        r#"{"params": "p0", "schedule": {"horizon": 1, "cycles": 2, "sigma": [1.0, 0.5]},
            "experiment": "schedule"}"#,
    );
    assert_eq!(kind, "schedule");
    assert!(msg.contains("sigma"), "{msg}");
}

#[test]
fn parse_errors_carry_a_position() {
    let err = parse_scenario("{\"params\": \"p0\",\n \"grid\": [3 3]}").unwrap_err();
    let msg = format!("{err:#}");
    assert!(msg.contains("line 2"), "{msg}");
    let (kind, _) = failure(r#"{"params": "p1"}"#);
    assert_eq!(kind, "scenario");
}

#[test]
fn initial_states_must_match_the_roads() {
    let err = parse_scenario(
        r#"{"params": "p0", "schedule": {"horizon": 1, "cycles": 1, "sigma": [1, 1]},
            "initial": [{"rho": 0.8, "eta": 2.0}, {"rho": 0.9, "eta": 2.7}]}"#,
    )
    .unwrap_err();
    assert!(format!("{err:#}").contains("incoming roads"));
    let err = parse_scenario(r#"{"params": "p0", "riemann": {"left": {"rho": 0.5, "eta": 0.5}, "right": {"rho": 0.5, "eta": 1.25}}}"#)
        .unwrap_err();
    assert!(format!("{err:#}").contains("riemann.left"));
}
