use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phasekit_cli::commands::{
    cmd_blind, cmd_holo, cmd_init_compare, cmd_reconstruct, cmd_simulate, cmd_spectral_gap,
    RunContext,
};

/// Config-driven phase retrieval experiments with reproducible seeds.
#[derive(Parser)]
#[command(name = "phasekit", version, about)]
struct Cli {
    /// Experiment configuration file (flat key = value with [section] headers)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Random seed; overrides run.seed from the config
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides run.out from the config
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker count recorded in the manifest; overrides run.jobs
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate coded diffraction amplitudes from the configured object
    Simulate,
    /// Reconstruct an object from previously simulated data
    Reconstruct,
    /// Blind ptychography: recover object and mask jointly
    Blind,
    /// Referenced holography: per-scheme recovery errors under photon budgets
    Holo,
    /// Compare initializers over repeated trials
    InitCompare,
    /// Spectral-gap diagnostic at the configured object
    SpectralGap,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> phasekit::Result<()> {
        let ctx = RunContext::new(
            cli.config.as_deref(),
            cli.seed,
            cli.out.as_deref(),
            cli.jobs,
        )?;
        match cli.command {
            Command::Simulate => cmd_simulate(&ctx),
            Command::Reconstruct => cmd_reconstruct(&ctx),
            Command::Blind => cmd_blind(&ctx),
            Command::Holo => cmd_holo(&ctx),
            Command::InitCompare => cmd_init_compare(&ctx),
            Command::SpectralGap => cmd_spectral_gap(&ctx),
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
