use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ptlight_cli::scenario::{check_ells, parse_grid, parse_state, preset};
use ptlight_cli::{error_kind, load_scenario, run, Experiment, Scenario};

/// Exact front tracking at a light-regulated n -> 1 junction.
#[derive(Parser)]
#[command(name = "ptlight", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the model hypotheses and write validation.csv.
    ValidateParams(Common),
    /// Write the green intervals to schedule.csv.
    Schedule(Common),
    /// Solve one Riemann problem and print the waves as CSV.
    SolveRiemann {
        #[command(flatten)]
        common: Common,
        /// Left state as `rho,eta`.
        #[arg(long, requires = "right")]
        left: Option<String>,
        /// Right state as `rho,eta`.
        #[arg(long, requires = "left")]
        right: Option<String>,
    },
    /// Track the junction problem; writes fronts, events, traces and grid CSVs.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Sampling grid as `NxM` (time nodes x space nodes per road).
        #[arg(long)]
        grid: Option<String>,
    },
    /// Convergence study over the cycle counts; writes report.csv and summary.csv.
    Homogenize {
        #[command(flatten)]
        common: Common,
        /// Comma-separated cycle counts, e.g. `4,8,16,32`.
        #[arg(long)]
        ells: Option<String>,
    },
    /// Run the experiment named in the scenario file.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter preset; replaces the scenario's parameters.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn scenario(c: &Common) -> Result<Scenario> {
    let mut sc = match (&c.config, &c.preset) {
        (Some(path), _) => load_scenario(path)?,
        (None, Some(name)) => Scenario::from_preset(name)?,
        (None, None) => bail!("either --config or --preset is required"),
    };
    if let (Some(_), Some(name)) = (&c.config, &c.preset) {
        sc.set_params(preset(name)?)?;
    }
    Ok(sc)
}

fn execute(cli: Cli) -> Result<()> {
    let (common, experiment, sc) = match cli.command {
        Command::ValidateParams(c) => {
            let sc = scenario(&c)?;
            (c, Experiment::ValidateParams, sc)
        }
        Command::Schedule(c) => {
            let sc = scenario(&c)?;
            (c, Experiment::Schedule, sc)
        }
        Command::SolveRiemann {
            common,
            left,
            right,
        } => {
            let mut sc = scenario(&common)?;
            if let (Some(l), Some(r)) = (left, right) {
                let (l, r) = (parse_state(&l)?, parse_state(&r)?);
                sc.params.check_state(l).context("--left")?;
                sc.params.check_state(r).context("--right")?;
                sc.riemann = Some((l, r));
            }
            (common, Experiment::SolveRiemann, sc)
        }
        Command::Simulate { common, grid } => {
            let mut sc = scenario(&common)?;
            if let Some(g) = grid {
                sc.grid = parse_grid(&g).context("--grid")?;
            }
            (common, Experiment::Simulate, sc)
        }
        Command::Homogenize { common, ells } => {
            let mut sc = scenario(&common)?;
            if let Some(list) = ells {
                let ells = list
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .context("--ells")?;
                sc.ells = check_ells(ells).context("--ells")?;
            }
            (common, Experiment::Homogenize, sc)
        }
        Command::Run(c) => {
            let sc = scenario(&c)?;
            let exp = sc.experiment.context("the scenario names no experiment")?;
            (c, exp, sc)
        }
    };
    let out = common
        .out
        .or_else(|| sc.out.clone())
        .unwrap_or_else(|| PathBuf::from("ptlight-out"));
    let outcome = run(&sc, experiment, &out)?;
    println!("{}", outcome.summary.trim_end());
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({
                "error": error_kind(&e),
                "message": format!("{e:#}"),
            });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
