use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracterp_cli::{figures, fixture_config, parse_config, run, Command, ProblemConfig, RunOptions, Status};

#[derive(Parser)]
#[command(name = "fracterp", version, about = "Fixed points of Read-Bajractarevic operators")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Certify a config without iterating
    Check(Common),
    /// Fixed point of a global or local operator
    Solve(Common),
    /// Backward trajectory of a non-stationary schedule
    Trajectory(Common),
    /// Fixed point of a quaternionic operator
    Quat(Common),
    /// Write the figure artifacts into --out
    Figures {
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, required_unless_present = "seed")]
    config: Option<PathBuf>,
    /// Directory that relative export paths resolve against
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Use the seeded random global operator from the test fixtures
    #[arg(long, conflicts_with = "config")]
    seed: Option<u64>,
}

fn load(common: &Common) -> Result<ProblemConfig, String> {
    if let Some(seed) = common.seed {
        return Ok(fixture_config(seed));
    }
    let path = common.config.as_ref().expect("clap enforces --config or --seed");
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Figures { out } => {
            let report = figures(&out);
            for line in &report.summary {
                println!("{line}");
            }
            for path in &report.artifacts {
                println!("wrote {}", path.display());
            }
            return ExitCode::from(report.status.exit_code() as u8);
        }
        Cmd::Check(c) => (Command::Check, c),
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::Trajectory(c) => (Command::Trajectory, c),
        Cmd::Quat(c) => (Command::Quat, c),
    };
    let cfg = match load(&common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Status::ConfigError.exit_code() as u8);
        }
    };
    let opts = RunOptions { out_dir: common.out, eps: common.eps, depth: common.depth, resolution: common.resolution };
    let report = run(&cfg, command, &opts);
    for line in &report.summary {
        println!("{line}");
    }
    for path in &report.artifacts {
        println!("wrote {}", path.display());
    }
    ExitCode::from(report.status.exit_code() as u8)
}
