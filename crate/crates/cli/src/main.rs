use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modefilter::pipeline::{self, ExperimentKind, RunConfig};

/// Simulate and analyse temporal mode filtering of photon-subtracted squeezed light.
#[derive(Parser)]
#[command(name = "modefilter", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; defaults are used when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a field, e.g. `--set teleport.n_samples=20000`.
    #[arg(short = 's', long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
    /// Output directory (same as `--set output_dir=...`).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in the configuration.
    Run(RunArgs),
    /// Filtered mode functions for several cavity cutoffs.
    Modes(RunArgs),
    /// W(0,0) against the applied mode's cutoff, conventional and mode-filtered.
    SubtractionScan(RunArgs),
    /// Negativity after teleportation, filtered against unfiltered input.
    TeleportCompare(RunArgs),
    /// Sample, reconstruct and bootstrap the model state.
    TomographyRoundtrip(RunArgs),
    /// Print the report of a finished run.
    Report {
        dir: PathBuf,
    },
    /// Print a configuration with all defaults.
    InitConfig {
        #[arg(short, long, default_value = "subtraction_scan")]
        experiment: String,
    },
}

fn load(args: &RunArgs, kind: Option<ExperimentKind>) -> modefilter::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::new(kind.unwrap_or(ExperimentKind::SubtractionScan)),
    };
    if let Some(kind) = kind {
        cfg.experiment = kind;
    }
    let mut overrides = args.overrides.clone();
    if let Some(out) = &args.out {
        overrides.push(format!("output_dir={:?}", out.display().to_string()));
    }
    cfg.with_overrides(&overrides)
}

fn execute(args: &RunArgs, kind: Option<ExperimentKind>) -> modefilter::Result<bool> {
    let cfg = load(args, kind)?;
    let summary = pipeline::run(&cfg)?;
    print!("{}", pipeline::render(&summary));
    println!("outputs in {}", cfg.output_dir.display());
    Ok(summary.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(a) => execute(a, None),
        Command::Modes(a) => execute(a, Some(ExperimentKind::Modes)),
        Command::SubtractionScan(a) => execute(a, Some(ExperimentKind::SubtractionScan)),
        Command::TeleportCompare(a) => execute(a, Some(ExperimentKind::TeleportCompare)),
        Command::TomographyRoundtrip(a) => execute(a, Some(ExperimentKind::TomographyRoundtrip)),
        Command::Report { dir } => pipeline::load_summary(dir).map(|s| {
            print!("{}", pipeline::render(&s));
            s.passed()
        }),
        Command::InitConfig { experiment } => experiment
            .parse::<ExperimentKind>()
            .and_then(|k| RunConfig::new(k).to_toml())
            .map(|text| {
                print!("{text}");
                true
            }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
