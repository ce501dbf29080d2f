use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tasep_cli::commands::default_trials;
use tasep_cli::{cmd_prob, cmd_simulate, cmd_verify, CliError, Format, JobConfig, OutputOverride};
use tasep_core::verify::Suite;

/// Exact and simulated transition probabilities of the multi-species TASEP.
#[derive(Parser)]
#[command(name = "tasep", version)]
struct Cli {
    /// Caps the number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Contour-integral probabilities for the targets of a job file.
    Prob {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Runs a property suite with seeded random draws.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, short = 'n')]
        size: usize,
        /// Defaults to 100 for the algebraic suites, 50 for boundary, 20 otherwise.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gillespie empirical distribution for a job file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Prob {
            config,
            out,
            format,
        } => {
            let cfg = JobConfig::load(&config)?;
            cmd_prob(&cfg, &OutputOverride { path: out, format })
        }
        Command::Verify {
            suite,
            size,
            trials,
            seed,
            out,
        } => {
            let trials = trials.unwrap_or_else(|| default_trials(suite));
            cmd_verify(suite, size, trials, seed, out.as_ref()).map(|_| ())
        }
        Command::Simulate {
            config,
            samples,
            seed,
            out,
            format,
        } => {
            let cfg = JobConfig::load(&config)?;
            cmd_simulate(&cfg, samples, seed, &OutputOverride { path: out, format })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::VerifyFailed) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
