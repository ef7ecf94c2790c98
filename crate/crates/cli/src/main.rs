//! `xnls`: configuration, orchestration and persistence for the NLS laboratory.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 runtime guard (overflow, boundary
//! pollution, incomplete run directory, failed acceptance criterion).

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use xnls_core::orlicz::OrliczVariant;
use xnls_core::XnlsError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn from_core(e: XnlsError) -> Self {
        match e {
            XnlsError::Config { .. } | XnlsError::InvalidGrid(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

#[derive(Parser)]
#[command(name = "xnls", version, about = "Spectral laboratory for the 2-D exponential NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured initial data and write a run directory.
    Evolve {
        config: PathBuf,
        /// Scalar override `section.key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Space-time norms, ratios and scattering distances from a run directory's snapshots.
    Diagnose {
        run_dir: PathBuf,
        /// Interval `a,b`; repeatable. Defaults to the config's intervals or the whole run.
        #[arg(long = "interval", value_parser = parse_interval)]
        intervals: Vec<(f64, f64)>,
        #[arg(long)]
        window_start: Option<f64>,
    },
    /// The standard inequality suite on the configured bank.
    Inequalities {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Norms of Moser's fields by radial quadrature.
    Moser {
        #[arg(long = "alpha", num_args = 1.., required = true)]
        alphas: Vec<f64>,
        /// Directory for moser.csv and moser.json; stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Luxemburg norm of a snapshot.
    Orlicz {
        input: PathBuf,
        #[arg(long, default_value = "Ltilde", value_parser = parse_variant)]
        variant: OrliczVariant,
        #[arg(long, default_value_t = 1.0)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symmetric decreasing rearrangement of a snapshot and its norm invariants.
    Rearrange {
        input: PathBuf,
        /// Snapshot file for the rearranged field.
        #[arg(long)]
        output: Option<PathBuf>,
        /// JSON report path; stdout otherwise.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// The acceptance criteria at their pinned tolerances.
    Fulltest {
        /// Criterion ids to run; all ten by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("interval `{s}` is not a,b"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(a >= 0.0 && b > a) {
        return Err(format!("[{a}, {b}] is not an interval"));
    }
    Ok((a, b))
}

fn parse_variant(s: &str) -> Result<OrliczVariant, String> {
    match s {
        "L" | "l" => Ok(OrliczVariant::L),
        "Ltilde" | "ltilde" => Ok(OrliczVariant::Ltilde),
        _ => Err(format!("unknown Orlicz variant `{s}` (L or Ltilde)")),
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("XNLS_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("XNLS_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Evolve { config, overrides } => commands::evolve_cmd(&config, &overrides),
        Command::Diagnose { run_dir, intervals, window_start } => {
            commands::diagnose_cmd(&run_dir, &intervals, window_start)
        }
        Command::Inequalities { config, overrides } => commands::inequalities_cmd(&config, &overrides),
        Command::Moser { alphas, out } => commands::moser_cmd(&alphas, out.as_deref()),
        Command::Orlicz { input, variant, threshold, out } => {
            commands::orlicz_cmd(&input, variant, threshold, out.as_deref())
        }
        Command::Rearrange { input, output, report } => {
            commands::rearrange_cmd(&input, output.as_deref(), report.as_deref())
        }
        Command::Fulltest { only, out } => commands::fulltest_cmd(&only, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
