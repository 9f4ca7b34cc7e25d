use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;
use pac_core::kinematics::ModelKind;
use pac_core::RobotState;
use pac_sim::commands::{run_compare, run_fk, run_statics, run_workspace};
use pac_sim::files::{parse_state, CompareFile, Robot, ScenarioFile, SweepFile};
use pac_sim::format::fmt;
use pac_sim::{CliError, CliResult};

/// Statics of tendon-driven soft manipulators under piecewise affine and
/// piecewise constant curvature models.
///
/// Exit status: 0 success, 1 solver failure, 2 input error.
/// Log verbosity follows PAC_SIM_LOG (error, warn, info, debug, trace).
#[derive(Debug, Parser)]
#[command(name = "pac-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Robot description (JSON).
    #[arg(long, global = true)]
    robot: Option<PathBuf>,

    /// Scenario, sweep or comparison file (JSON), depending on the command.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Override the scenario's model.
    #[arg(long, global = true, value_parser = parse_model)]
    model: Option<ModelKind>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps and comparisons.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Centerline and tip pose of a configuration.
    Fk {
        /// Configuration as `c0,c1,phi,dl;…` per segment; defaults to the
        /// scenario's initial guess.
        #[arg(long)]
        state: Option<String>,
    },
    /// Quasi-static equilibrium of a scenario.
    Statics,
    /// Tip workspace over a grid of tendon contractions and tip masses.
    Workspace,
    /// PAC and PCC reconstruction errors against a reference.
    Compare {
        /// Marker CSV (`segment,s,x,y,z`) replacing the file's ground truth.
        #[arg(long)]
        markers: Option<PathBuf>,
    },
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse::<ModelKind>().map_err(|e| e.to_string())
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    path.as_deref()
        .ok_or_else(|| CliError::Invalid(format!("--{flag} is required for this command")))
}

fn out_dir(cli: &Cli, from_file: Option<&str>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| from_file.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn run(cli: &Cli) -> CliResult<()> {
    let robot = Robot::load(require(&cli.robot, "robot")?)?;
    match &cli.command {
        Command::Fk { state } => {
            let scenario = cli.scenario.as_deref().map(ScenarioFile::load).transpose()?;
            let (q, model) = match (state, &scenario) {
                (Some(text), _) => (
                    parse_state(text)?,
                    cli.model.or(scenario.as_ref().and_then(|s| s.model)),
                ),
                (None, Some(file)) => {
                    let sc = file.resolve(&robot, cli.model)?;
                    (sc.problem.initial, Some(sc.problem.model))
                }
                (None, None) => (RobotState::zeros(robot.params.len()), cli.model),
            };
            let dir = out_dir(
                cli,
                scenario.as_ref().and_then(|s| s.output.as_ref()?.directory.as_deref()),
            );
            let tip = run_fk(&robot, &q, model.unwrap_or(ModelKind::Pac), &dir)?;
            println!("tip transform:");
            for r in 0..3 {
                let row: Vec<String> = (0..3).map(|c| fmt(tip.rotation[(r, c)])).collect();
                println!("  {} {}", row.join(" "), fmt(tip.translation[r]));
            }
            println!("  0 0 0 1");
            println!("centerline: {}", dir.join("centerline.csv").display());
        }
        Command::Statics => {
            let file = ScenarioFile::load(require(&cli.scenario, "scenario")?)?;
            let dir = out_dir(cli, file.output.as_ref().and_then(|o| o.directory.as_deref()));
            let s = run_statics(&robot, &file, cli.model, &dir)?;
            println!(
                "{} ({}): converged in {} steps, residual {}",
                s.scenario,
                s.model,
                s.iterations,
                fmt(s.residual_norm)
            );
            println!(
                "tip position: {} {} {}",
                fmt(s.tip_position[0]),
                fmt(s.tip_position[1]),
                fmt(s.tip_position[2])
            );
            println!("results: {}", dir.display());
        }
        Command::Workspace => {
            let file = SweepFile::load(require(&cli.scenario, "scenario")?)?;
            let dir = out_dir(cli, file.output.as_ref().and_then(|o| o.directory.as_deref()));
            let s = run_workspace(&robot, &file, cli.model, &dir, cli.workers)?;
            for l in &s.loads {
                println!(
                    "tip mass {} kg: {}/{} converged, bounding-box volume {} m^3",
                    fmt(l.tip_mass),
                    l.converged,
                    l.points,
                    fmt(l.bbox_volume)
                );
            }
            println!("results: {}", dir.display());
        }
        Command::Compare { markers } => {
            let path = require(&cli.scenario, "scenario")?;
            let file = CompareFile::load(path)?;
            let dir = out_dir(cli, file.output.as_ref().and_then(|o| o.directory.as_deref()));
            let set_dir = path.parent().unwrap_or(Path::new("."));
            let s = run_compare(&robot, &file, set_dir, markers.as_deref(), &dir, cli.workers)?;
            for r in &s.rows {
                println!(
                    "{}: PAC {} m, PCC {} m, ratio {}",
                    r.scenario,
                    fmt(r.pac_tip_error),
                    fmt(r.pcc_tip_error),
                    fmt(r.ratio)
                );
            }
            println!("mean PAC/PCC tip error ratio: {}", fmt(s.mean_ratio));
            println!("results: {}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PAC_SIM_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
