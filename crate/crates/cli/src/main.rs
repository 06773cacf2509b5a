use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jamiton_cli::{exit_code, run, RunOptions, TaskKind};

/// Jamitons in second-order traffic flow: exact waves, ring-road simulation,
/// and their comparison.
#[derive(Parser)]
#[command(name = "jamiton", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solitary jamitons for a list of far-field densities
    Solve(Common),
    /// Periodic jamiton train on a ring
    Train(Common),
    /// Band of linearly unstable densities
    Stability(Common),
    /// Particle simulation on a ring road
    Sim(Common),
    /// Vehicle trajectories through an exact or simulated field
    Traj(Common),
    /// Simulated against exact jamitons
    Compare(Common),
    /// Jamiton existence over a density grid
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Named parameter set (paper-fig1, sugiyama-ring)
    #[arg(long)]
    preset: Option<String>,
    /// Scenario file of key=value lines; overrides preset values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiply the particle count of a simulation
    #[arg(long)]
    seed_scale: Option<f64>,
    /// Also write SVG plots
    #[arg(long)]
    svg: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, c) = match cli.command {
        Command::Solve(c) => (TaskKind::Solve, c),
        Command::Train(c) => (TaskKind::Train, c),
        Command::Stability(c) => (TaskKind::Stability, c),
        Command::Sim(c) => (TaskKind::Sim, c),
        Command::Traj(c) => (TaskKind::Traj, c),
        Command::Compare(c) => (TaskKind::Compare, c),
        Command::Sweep(c) => (TaskKind::Sweep, c),
    };
    let opts = RunOptions {
        preset: c.preset,
        config: c.config,
        out: c.out,
        seed_scale: c.seed_scale,
        svg: c.svg,
    };
    match run(task, &opts) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
