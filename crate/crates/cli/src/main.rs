//! `setmember`: run set-membership estimation experiments from JSON
//! configs and write plot-ready CSV and JSONL outputs.

mod commands;
mod config;
mod fsio;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Like `println!` for report output. When the reader has closed the
/// pipe, the process exits with the conventional SIGPIPE status
/// instead of panicking; a truncated report is how pipes end, not an
/// error.
macro_rules! report {
    ($($arg:tt)*) => {
        $crate::emit(::std::format_args!($($arg)*))
    };
}
pub(crate) use report;

pub(crate) fn emit(line: std::fmt::Arguments) {
    let mut out = std::io::stdout().lock();
    let written = out.write_fmt(line).and_then(|()| out.write_all(b"\n"));
    if written.is_err() {
        // 128 + SIGPIPE, the status a filter dies with under the
        // default signal disposition.
        std::process::exit(141);
    }
}

/// A command's terminal failure, carrying its exit code.
///
/// Stable mapping: 1 filesystem, 2 usage or bad config, 3 stopping rule
/// never fired, 4 a feasible set emptied (noise bound violated).
#[derive(Debug)]
pub enum Failure {
    Io(String),
    Usage(String),
    NoStop,
    Infeasible { node: usize, instant: u64 },
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::NoStop => 3,
            Failure::Infeasible { .. } => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(m) | Failure::Usage(m) => m.clone(),
            Failure::NoStop => "stopping rule did not fire within max_steps".into(),
            Failure::Infeasible { node, instant } => format!(
                "feasible set of node {node} emptied at instant {instant}; \
                 the assumed noise bound understates the real noise"
            ),
        }
    }
}

/// Simulator for set-membership parameter estimation over sensor
/// networks: incremental cyclic projections and consensus projections
/// under bounded measurement noise.
#[derive(Parser)]
#[command(name = "setmember", version, max_term_width = 100)]
struct Cli {
    /// Replace the seed from the config file.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    /// Print the effective configuration as JSON and exit.
    #[arg(long, global = true)]
    dump_config: bool,

    /// Suppress report output on stdout (files are still written).
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario with one estimator; write trajectory.csv and
    /// run_manifest.json.
    Run(OutputArgs),
    /// Run the Monte Carlo comparison; write summary.csv, runs.jsonl,
    /// and campaign_manifest.json.
    Campaign(OutputArgs),
    /// Check the configured network against the consensus assumptions.
    Validate(ConfigArg),
}

#[derive(Args)]
struct OutputArgs {
    #[command(flatten)]
    config: ConfigArg,

    /// Directory for output files.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ConfigArg {
    /// Path to the JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let _ = writeln!(std::io::stderr(), "error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    init_thread_pool()?;
    let config_path = match &cli.command {
        Command::Run(args) | Command::Campaign(args) => &args.config.config,
        Command::Validate(arg) => &arg.config,
    };
    let cfg = config::load_effective(config_path, cli.seed)?;
    if cli.dump_config {
        let json = serde_json::to_string_pretty(&cfg)
            .map_err(|e| Failure::Usage(format!("cannot render config: {e}")))?;
        report!("{json}");
        return Ok(());
    }
    match &cli.command {
        Command::Run(args) => commands::run(&cfg, &args.out, cli.quiet),
        Command::Campaign(args) => commands::campaign(&cfg, &args.out, cli.quiet),
        Command::Validate(_) => commands::validate(&cfg, cli.quiet),
    }
}

/// Honors SETMEMBER_THREADS as a cap on campaign parallelism. Results
/// never depend on it; only wall-clock time does.
fn init_thread_pool() -> Result<(), Failure> {
    let Some(raw) = std::env::var_os("SETMEMBER_THREADS") else {
        return Ok(());
    };
    let threads = raw
        .to_str()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| Failure::Usage("SETMEMBER_THREADS must be a positive integer".into()))?;
    // A second initialization attempt means the pool already exists
    // with the right size for this process; nothing to do.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}
