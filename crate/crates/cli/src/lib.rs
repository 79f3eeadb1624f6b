//! `conequant` — verification suites and spectral sweeps for the double-cone
//! models, as machine-readable CSV/JSON reports.
//!
//! Exit-code contract: 0 all checks pass, 1 check failure (the report is
//! still written), 2 usage error. `CONEQUANT_THREADS` caps the worker pool;
//! identical configuration and seed produce byte-identical reports at any
//! thread count.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use conequant_core::error::CoreError;

pub mod check_pde;
pub mod classical;
pub mod spectrum;
pub mod symmetries;

/// Fixed schema identifier embedded in every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            // parameter problems that slipped past flag validation are
            // still usage errors; anything else is a failed run
            CliError::Core(CoreError::InvalidParam(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Free particle on the cone.
    Free,
    /// Radial harmonic oscillator (needs --omega).
    Ho,
}

#[derive(Parser, Debug)]
#[command(
    name = "conequant",
    version,
    about = "Symmetry certification and spectra for free and harmonic motion on a double cone"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the report to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Report format (default: json for symmetries/check-pde, csv for
    /// spectrum/classical).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Certify a generator catalog: determining residuals, algebra closure,
    /// Killing form, and the linearizing subalgebra.
    Symmetries(symmetries::SymmetriesArgs),
    /// Sweep oscillator bound states over (p, n) and compare against the
    /// closed-form energy laws.
    Spectrum(spectrum::SpectrumArgs),
    /// Integrate a classical trajectory and monitor all eight first
    /// integrals.
    Classical(classical::ClassicalArgs),
    /// Test which candidate symmetry actions map solutions of a given wave
    /// equation to solutions.
    #[command(name = "check-pde")]
    CheckPde(check_pde::CheckPdeArgs),
}

/// A rendered report plus the overall verdict that decides the exit code.
pub struct Outcome {
    pub rendered: String,
    pub pass: bool,
}

/// Full CLI entry point: parse, run, write, map to the exit-code contract.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            // clap's own exit codes: 0 for --help/--version, 2 otherwise
            return if code == 0 { 0 } else { 2 };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if let Err(e) = write_output(&cli.out, &outcome.rendered) {
                eprintln!("error: {e}");
                return e.exit_code();
            }
            if outcome.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Run the selected command inside the configured thread pool and return
/// the rendered report.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let execute = || match &cli.command {
        Command::Symmetries(args) => symmetries::run(args, cli.format),
        Command::Spectrum(args) => spectrum::run(args, cli.format),
        Command::Classical(args) => classical::run(args, cli.format),
        Command::CheckPde(args) => check_pde::run(args, cli.format),
    };
    match thread_pool()? {
        Some(pool) => pool.install(execute),
        None => execute(),
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, CliError> {
    let raw = match std::env::var("CONEQUANT_THREADS") {
        Ok(v) => v,
        Err(std::env::VarError::NotPresent) => return Ok(None),
        Err(e) => return Err(CliError::Usage(format!("CONEQUANT_THREADS: {e}"))),
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CliError::Usage(format!(
            "CONEQUANT_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    if n == 0 {
        return Err(CliError::Usage(
            "CONEQUANT_THREADS must be at least 1".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
    Ok(Some(pool))
}

fn write_output(out: &Option<PathBuf>, rendered: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(rendered.as_bytes())?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(rendered.as_bytes())?;
            Ok(())
        }
    }
}

/// Render a JSON report: pretty-printed with a trailing newline so files
/// are diff- and `cat`-friendly.
pub(crate) fn render_json<T: serde::Serialize>(report: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Usage(format!("cannot serialize report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Shared flag validation: k must lie in (0, 1] (k = 1 is the flat,
/// uncut plane and a useful sanity configuration).
pub(crate) fn validate_k(k: f64) -> Result<(), CliError> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(CliError::Usage(format!(
            "--k must lie in (0, 1], got {k}"
        )));
    }
    Ok(())
}
