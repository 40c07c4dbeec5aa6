use std::path::PathBuf;
use std::process::ExitCode;

use botoc_cli::{exit_code, render, run, Command, OutputFormat, RunConfig, THREADS_ENV};
use clap::{Args, Parser};

/// Bipartite OTOC estimates, sampling experiments and channel diagnostics.
#[derive(Parser)]
#[command(name = "botoc", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Subcommand)]
enum Sub {
    /// G(t) on a time grid
    OtocCurve(RunArgs),
    /// Haar, NRC, NRC+ and exact long-time averages with the equilibration bound
    Estimates(RunArgs),
    /// Ensemble sampling of the commutator OTOC at one time
    Sample(RunArgs),
    /// Entropy production of the reduced dynamics over random pure states
    Entropy(RunArgs),
    /// Reduced-channel diagnostics on a time grid
    Channel(RunArgs),
    /// Estimate table over chain lengths for the three reference models
    #[command(name = "figure1")]
    Figure1(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file mirroring the run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Worker threads
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

impl Sub {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Sub::OtocCurve(a) => (Command::OtocCurve, a),
            Sub::Estimates(a) => (Command::Estimates, a),
            Sub::Sample(a) => (Command::Sample, a),
            Sub::Entropy(a) => (Command::Entropy, a),
            Sub::Channel(a) => (Command::Channel, a),
            Sub::Figure1(a) => (Command::Figure1, a),
        }
    }
}

fn infer_format(path: &std::path::Path) -> Option<OutputFormat> {
    match path.extension()?.to_str()? {
        "csv" => Some(OutputFormat::Csv),
        "json" => Some(OutputFormat::Json),
        _ => None,
    }
}

fn execute(command: Command, args: RunArgs) -> anyhow::Result<()> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path, command)?,
        None => RunConfig::for_command(command),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(path) = args.output {
        cfg.output.path = Some(path);
    }
    if let Some(format) = args.format {
        cfg.output.format = format;
    } else if let Some(f) = cfg.output.path.as_deref().and_then(infer_format) {
        cfg.output.format = f;
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }

    let record = run(&cfg)?;
    let text = render(&record, cfg.output.format)?;
    match &cfg.output.path {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let (command, args) = Cli::parse().command.split();
    match execute(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
