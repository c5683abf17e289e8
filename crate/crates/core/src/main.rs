//! Command-line front end for the experiment runners.
//!
//! Each subcommand matches one experiment kind; the config file must describe
//! the same kind. On failure the process prints a single machine-readable
//! JSON line (`{"error": "..."}`) to stderr and exits nonzero.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use onebit_mimo::sim::{self, ExperimentKind, OutputFormat};
use onebit_mimo::{Error, Result};

#[derive(Parser)]
#[command(
    name = "onebit-mimo",
    version,
    about = "Monte Carlo experiments for one-bit symbol-level precoding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the constellation range multiplier and report per-user MSE.
    MseSweep(RunArgs),
    /// Sweep SNR at a fixed antenna count and report symbol error rates.
    SerVsSnr(RunArgs),
    /// Sweep the antenna count at a fixed SNR and report symbol error rates.
    SerVsAntennas(RunArgs),
    /// Precode configured targets once, or emit the one-bit scatter set.
    PrecodeOnce(RunArgs),
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Command::MseSweep(args) => (ExperimentKind::MseSweep, args),
            Command::SerVsSnr(args) => (ExperimentKind::SerVsSnr, args),
            Command::SerVsAntennas(args) => (ExperimentKind::SerVsAntennas, args),
            Command::PrecodeOnce(args) => (ExperimentKind::PrecodeOnce, args),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value experiment config file.
    #[arg(long)]
    config: PathBuf,

    /// Override the config's master_seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,

    /// Worker thread count (default: all cores). Results are byte-identical
    /// for every choice.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", serde_json::json!({ "error": err.to_string() }));
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (kind, args) = cli.command.split();
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| Error::Io { path: args.config.clone(), source })?;
    let mut config = sim::parse_config(&text)?;
    if config.kind != kind {
        return Err(Error::Config(format!(
            "config describes {} but the {kind} subcommand was invoked",
            config.kind
        )));
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }

    let table = match args.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot build a {threads}-thread pool: {e}")))?
            .install(|| sim::run(&config))?,
        None => sim::run(&config)?,
    };

    match args.out {
        Some(path) => table.write(&path, args.format)?,
        None => {
            let mut body = table.render(args.format)?;
            if !body.ends_with('\n') {
                body.push('\n');
            }
            write_stdout(&body)?;
        }
    }
    Ok(())
}

/// Writes to stdout, treating a closed pipe (e.g. `| head`) as a normal exit
/// rather than an error.
fn write_stdout(body: &str) -> Result<()> {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(body.as_bytes()).and_then(|()| stdout.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(source) => Err(Error::Io { path: PathBuf::from("<stdout>"), source }),
    }
}
