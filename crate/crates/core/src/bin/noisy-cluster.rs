use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use noisy_cluster::cli::{self, ExperimentConfig};
use noisy_cluster::Error;

#[derive(Parser)]
#[command(version, about = "Deconvolution k-means for noise-contaminated samples")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides master_seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the parallel parts (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Dump the deconvolution kernel table as offset,value rows.
    KernelDump,
    /// Estimate the deconvolution density on the grid.
    Density,
    /// Minimise the deconvolved clustering risk.
    Cluster,
    /// Monte Carlo excess-risk rate experiment.
    RateExperiment,
    /// Smoothing-bias slope experiment.
    BiasExperiment,
}

fn run(args: &Args) -> Result<(), Error> {
    if let Some(t) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {t} threads: {e}")))?;
    }
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    match args.command {
        Command::KernelDump => cli::cmd_kernel_dump(&cfg, &args.out),
        Command::Density => cli::cmd_density(&cfg, &args.out),
        Command::Cluster => cli::cmd_cluster(&cfg, &args.out),
        Command::RateExperiment => cli::cmd_rate(&cfg, &args.out),
        Command::BiasExperiment => cli::cmd_bias(&cfg, &args.out),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
