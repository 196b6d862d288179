//! `mflab` — config-driven experiment runner for mock Fourier series on
//! self-affine spectral measures.
//!
//! Usage: `mflab <command> --config <path> [--out <dir>] [--threads k] [--seed s]`.
//!
//! Exit codes: 0 success, 1 invalid config or triple validation failure,
//! 2 numeric failure (budget, degeneracy, estimator disagreement), 3 I/O.
//! Failures print a single machine-readable JSON object to stderr.

mod commands;
mod config;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::{CliError, CliResult};
use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "mflab",
    version,
    about = "Numerical laboratory for mock Fourier series on self-affine spectral measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the JSON experiment configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's out_dir, then ".".
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,
    /// Override the config seed.
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// Validate the (R, B, L) triple and report the unitarity defect.
    Validate,
    /// Enumerate the τ-scaled spectrum at the configured level.
    Spectrum,
    /// Cross-check the kernel's direct sum against the factored product.
    KernelCheck,
    /// Measure the exponential family's orthonormality defect.
    Ortho,
    /// Estimate the divergence indicator per digit by both estimators.
    Delta,
    /// Fit the partial-sum growth exponent along a random digit stream.
    Growth,
    /// Measure tail masses of the running maximum against thresholds.
    Tail,
    /// Decide whether the divergence criterion holds for the triple.
    Classify,
    /// Scan empirical ball-mass doubling ratios over the node cloud.
    Doubling,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Spectrum => "spectrum",
            Command::KernelCheck => "kernel-check",
            Command::Ortho => "ortho",
            Command::Delta => "delta",
            Command::Growth => "growth",
            Command::Tail => "tail",
            Command::Classify => "classify",
            Command::Doubling => "doubling",
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    match try_run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{}", e.to_json());
            std::process::exit(e.exit_code());
        }
    }
}

fn try_run(cli: Cli) -> CliResult<()> {
    let config_path = cli
        .config
        .ok_or_else(|| CliError::Invalid("--config <PATH> is required".to_string()))?;
    let raw = std::fs::read_to_string(&config_path).map_err(|source| CliError::Io {
        path: config_path.clone(),
        source,
    })?;
    let mut config: ExperimentConfig = serde_json::from_str(&raw)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", config_path.display())))?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out_dir = cli
        .out
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|source| CliError::Io {
        path: out_dir.clone(),
        source,
    })?;
    let triple = config.triple()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Invalid(format!("cannot build thread pool: {e}")))?;

    let start = std::time::Instant::now();
    let files = pool.install(|| match cli.command {
        Command::Validate => commands::cmd_validate(&config, &triple, &out_dir),
        Command::Spectrum => commands::cmd_spectrum(&config, &triple, &out_dir),
        Command::KernelCheck => commands::cmd_kernel_check(&config, &triple, &out_dir),
        Command::Ortho => commands::cmd_ortho(&config, &triple, &out_dir),
        Command::Delta => commands::cmd_delta(&config, &triple, &out_dir),
        Command::Growth => commands::cmd_growth(&config, &triple, &out_dir),
        Command::Tail => commands::cmd_tail(&config, &triple, &out_dir),
        Command::Classify => commands::cmd_classify(&config, &triple, &out_dir),
        Command::Doubling => commands::cmd_doubling(&config, &triple, &out_dir),
    })?;
    let wall_time_seconds = start.elapsed().as_secs_f64();
    commands::write_manifest(&out_dir, cli.command.name(), &config, wall_time_seconds, &files)?;
    Ok(())
}
