//! `unitrace`: count, sample and validate uniform traces of reactive-module
//! systems, and estimate error-detection probabilities by random walks.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use unitrace::SamplingMode;

use report::Format;

const EXIT_CODES: &str = "Exit codes:
  0  success
  2  bad command line
  3  input file unreadable
  4  input does not parse
  5  system not supported (labels, synchronization shape, foreign reads)
  6  request cannot be met (no trace of that length, too many to enumerate,
     evaluation error during a walk)
  7  output cannot be written
  8  validation failed (illegal trace or uniformity rejected)";

#[derive(Debug, Parser)]
#[command(name = "unitrace", version, about, after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Io {
    /// Module system source file.
    pub input: PathBuf,
    /// Write to this file instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Asymptotic,
    /// Exact for small systems and lengths.
    Auto,
}

impl ModeArg {
    pub fn mode(self) -> Option<SamplingMode> {
        match self {
            ModeArg::Exact => Some(SamplingMode::Exact),
            ModeArg::Asymptotic => Some(SamplingMode::Asymptotic),
            ModeArg::Auto => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct Sampling {
    /// Trace length.
    #[arg(short = 'n', long)]
    pub length: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Synchronization label; labels used by several modules must be this one.
    #[arg(long)]
    pub sync: Option<String>,
    /// Random seed; a fresh one is drawn and echoed when absent.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact number of traces of a length, and per-module growth estimates.
    Count {
        #[command(flatten)]
        io: Io,
        #[arg(short = 'n', long)]
        length: usize,
        #[arg(long)]
        sync: Option<String>,
    },
    /// Uniform random traces, one per line.
    Sample {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        sampling: Sampling,
        /// Number of traces.
        #[arg(short = 'm', long, default_value_t = 1)]
        count: usize,
    },
    /// Random-walk estimate of the probability that a walk reaches a state
    /// satisfying `--detect`.
    Estimate {
        #[command(flatten)]
        io: Io,
        /// Boolean expression over the system's variables.
        #[arg(long)]
        detect: String,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Walk depth.
        #[arg(short = 'k', long)]
        depth: usize,
        /// Also estimate at these depths, comma separated.
        #[arg(long, value_delimiter = ',')]
        iterate: Vec<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compares sampled traces with the exactly enumerated set of traces.
    Validate {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        sampling: Sampling,
        /// Number of samples; defaults to 20 per trace, at least 1000.
        #[arg(short = 'm', long)]
        count: Option<u64>,
    },
    /// Per-module automata in the interchange format.
    Flatten {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        sync: Option<String>,
    },
    /// The explicit global automaton, for small systems.
    Product {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        sync: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("unitrace: {e}");
            ExitCode::from(e.code())
        }
    }
}
