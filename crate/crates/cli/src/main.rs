use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsketch::experiments::Channel;

mod commands;
mod config;

use commands::Failure;
use config::{Command, Overrides, RunConfig};

/// Quadratic random sketching experiments.
#[derive(Parser)]
#[command(name = "qsketch", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Quadrant occupancy of a rotating disk from frame sketches.
    Disk(Common),
    /// Nearest-centroid MNIST classification, direct and sketched.
    Mnist(Common),
    /// Monte Carlo distortion of the sign-product estimate.
    SpeBench(Common),
    /// Choose the simulated device's full scale from sample inputs.
    Calibrate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ensemble seed (mnist: replaces the seed list).
    #[arg(long)]
    seed: Option<u64>,
    /// Sketch size(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// ideal, opu-sim or opu-file (mnist: comma separated).
    #[arg(long, value_delimiter = ',')]
    channel: Option<Vec<Channel>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// MNIST directory.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Recorded sketch file for the opu-file channel.
    #[arg(long)]
    sketches: Option<PathBuf>,
    /// Write the measured sketches in the recorded-file format.
    #[arg(long)]
    export_sketches: bool,
}

fn resolve(command: Command, c: Common) -> Result<RunConfig, Failure> {
    let base = match &c.config {
        Some(path) => {
            let rc = RunConfig::load(path).map_err(Failure::Config)?;
            if rc.command != command {
                return Err(Failure::Config(anyhow::anyhow!(
                    "{} is a {} configuration, not {}",
                    path.display(),
                    rc.command.name(),
                    command.name()
                )));
            }
            rc
        }
        None => RunConfig::new(command),
    };
    let ov = Overrides {
        seed: c.seed,
        m: c.m,
        channel: c.channel,
        out: c.out,
        data: c.data,
        sketches: c.sketches,
        export_sketches: c.export_sketches,
    };
    base.resolve(&ov).map_err(Failure::Config)
}

fn run(command: Command, c: Common) -> Result<(), Failure> {
    let rc = resolve(command, c)?;
    std::fs::create_dir_all(&rc.out)
        .map_err(|e| Failure::Config(anyhow::anyhow!("cannot create output directory {}: {e}", rc.out.display())))?;
    let record = rc.to_toml().map_err(Failure::Runtime)?;
    std::fs::write(rc.resolved_path(), record)
        .map_err(|e| Failure::Config(anyhow::anyhow!("output directory {} is not writable: {e}", rc.out.display())))?;
    match command {
        Command::Disk => commands::disk(&rc),
        Command::Mnist => commands::mnist(&rc),
        Command::SpeBench => commands::spe_bench(&rc),
        Command::Calibrate => commands::calibrate(&rc),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Disk(c) => (Command::Disk, c),
        Cmd::Mnist(c) => (Command::Mnist, c),
        Cmd::SpeBench(c) => (Command::SpeBench, c),
        Cmd::Calibrate(c) => (Command::Calibrate, c),
    };
    match run(command, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qsketch {}: {f}", command.name());
            ExitCode::from(f.exit_code())
        }
    }
}
