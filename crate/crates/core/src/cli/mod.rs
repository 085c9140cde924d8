//! Command-line front end: `rates`, `scan`, `bell` and `oracle`.

pub mod commands;
pub mod config;
pub mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use commands::Outcome;
pub use config::{ConfigArgs, FileConfig, RunConfig};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wwspdc", version, about = "Phase-space simulation of down-conversion photon counting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single and coincidence rates on a grid of analyzer angles
    #[command(allow_negative_numbers = true)]
    Rates(ConfigArgs),
    /// Coincidence rate against the analyzer offset with a cos^2 fit
    #[command(allow_negative_numbers = true)]
    Scan(ConfigArgs),
    /// Clauser-Horne test from closed-form, sampled and number-basis rates
    ///
    /// Violation needs eta_a + eta_b < (1 + sqrt 2) eta_a eta_b; for equal
    /// efficiencies the threshold is 2(sqrt 2 - 1) ~ 0.8284, and 2/3 is quoted for
    /// non-maximally entangled states.
    #[command(allow_negative_numbers = true)]
    Bell(ConfigArgs),
    /// Cross-checks between the independent calculations; exits 3 on failure
    #[command(allow_negative_numbers = true)]
    Oracle(ConfigArgs),
}

impl Command {
    pub fn args(&self) -> &ConfigArgs {
        match self {
            Command::Rates(a) | Command::Scan(a) | Command::Bell(a) | Command::Oracle(a) => a,
        }
    }

    fn execute(&self, cfg: &RunConfig) -> crate::Result<Outcome> {
        match self {
            Command::Rates(_) => commands::rates(cfg),
            Command::Scan(_) => commands::scan(cfg),
            Command::Bell(_) => commands::bell(cfg),
            Command::Oracle(_) => commands::oracle(cfg),
        }
    }
}

/// Path of the resolved-config echo written next to `out`.
pub fn config_echo_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".config.toml");
    PathBuf::from(s)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Precondition(_) => EXIT_CONFIG,
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Error> {
    match threads {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}"))),
    }
}

fn emit(cli: &Cli, cfg: &RunConfig, outcome: &Outcome, wall: f64, stderr: &mut dyn Write) -> io::Result<()> {
    let echo = cfg.to_toml();
    match &cli.command.args().out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            outcome.table.write_csv(&mut w, wall)?;
            w.flush()?;
            std::fs::write(config_echo_path(path), echo)?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            outcome.table.write_csv(&mut w, wall)?;
            w.flush()?;
            writeln!(stderr, "# resolved config")?;
            for line in echo.lines() {
                writeln!(stderr, "# {line}")?;
            }
        }
    }
    for line in &outcome.summary {
        writeln!(stderr, "{line}")?;
    }
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let mut stderr = io::stderr();
    let start = Instant::now();
    let cfg = match RunConfig::from_args(cli.command.args()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let outcome = match in_pool(cfg.threads, || cli.command.execute(&cfg)).and_then(|r| r) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let wall = start.elapsed().as_secs_f64();
    if let Err(e) = emit(cli, &cfg, &outcome, wall, &mut stderr) {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_IO;
    }
    if outcome.failed {
        EXIT_ORACLE
    } else {
        EXIT_OK
    }
}
