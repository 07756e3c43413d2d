use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rhoj_cli::config::{parse_config, Config};
use rhoj_cli::{commands, CliError};

/// Measurement simulator over probability density and current: runs
/// scenarios, verifies them against closed forms, samples trial batches,
/// sweeps channel widths, and calibrates device widths.
#[derive(Parser)]
#[command(name = "rhoj", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario configuration file (required).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for reports and dumps (default ./out, unless the
    /// config sets output.dir).
    #[arg(long, global = true, value_name = "PATH")]
    out_dir: Option<PathBuf>,

    /// Override the sampling seed from the config.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Override the grid point count from the config.
    #[arg(long, global = true, value_name = "INT")]
    grid_points: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute in/out fields, estimators, and indicators; dump fields and report.
    Run,
    /// Compare the numerical pipeline against the closed-form oracle.
    Verify,
    /// Draw trial batches and compare factual with predicted estimators.
    Sample,
    /// Evaluate the indicator table over a grid of channel widths.
    Sweep,
    /// Recover channel widths from observed out-reading estimators.
    Calibrate,
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let Some(path) = &cli.config else {
        return Err(CliError::Config("--config PATH is required".into()));
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        match &mut cfg.sampling {
            Some(sampling) => sampling.seed = seed,
            None => {
                return Err(CliError::Config(
                    "--seed given but the config has no sampling block".into(),
                ));
            }
        }
    }
    if let Some(n) = cli.grid_points {
        cfg.grid_n = n;
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("./out"));
    match cli.command {
        Command::Run => commands::run(&cfg, &out_dir),
        Command::Verify => commands::verify(&cfg, &out_dir),
        Command::Sample => commands::sample(&cfg, &out_dir),
        Command::Sweep => commands::sweep(&cfg, &out_dir),
        Command::Calibrate => commands::calibrate(&cfg, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
