//! `oscgroup`: solve the parameter systems, sample oscillator states and
//! Green functions, apply group transformations and run verification suites.
//!
//! Exit status: 0 success, 1 failed checks, 2 usage or parse error, 3 runtime
//! error (singular times, domain errors, truncation).

mod commands;
mod problem;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use problem::ProblemArgs;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0} check(s) failed")]
    Checks(usize),
}

impl From<oscgroup::Error> for CliError {
    fn from(e: oscgroup::Error) -> Self {
        use oscgroup::Error as E;
        match e {
            E::Parse { .. } | E::Invalid(_) | E::ContextMismatch(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(format!("i/o: {e}"))
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Checks(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "oscgroup",
    version,
    about = "Invariance groups of quadratic Schrödinger equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parameter trajectory t,mu,alpha,beta,gamma,delta,epsilon,kappa
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_hyphen_values = true)]
        t0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t1: Option<String>,
        #[arg(long)]
        step: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Oscillator state ψₙ(·, t) on a grid
    Wavefunction {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        /// lo:hi:step
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Green function G(x, y, t) on grid × grid
    Green {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ψₙ(·, 0) moved to time t by Green-function quadrature
    Propagate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Image of a source-equation state under a group element
    Transform {
        #[command(flatten)]
        problem: ProblemArgs,
        /// galilei | dilatation | expansion | expansion_singular | osc_to_free |
        /// free_to_osc | oscillator_reflection | ansatz
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Galilei velocity
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        v: String,
        /// Galilei space shift
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        x0: String,
        /// Galilei time shift
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        shift: String,
        /// Galilei constant phase
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        phase: String,
        /// Dilatation factor
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        l: String,
        /// Expansion parameter
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        m: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// |ψₙ|² table t,x,abs2 over a time range
    Density {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        n: Option<usize>,
        /// lo:hi:step, e.g. 0:2π:0.05
        #[arg(long, allow_hyphen_values = true)]
        times: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario's check suite
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        /// Report CSV check,value,threshold,pass
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Writes to `path`, or to standard output without one.
pub fn write_output<F>(path: Option<&Path>, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve {
            problem,
            t0,
            t1,
            step,
            out,
        } => commands::solve(&problem, t0.as_deref(), t1.as_deref(), step.as_deref(), out.as_deref()),
        Command::Wavefunction {
            problem,
            n,
            t,
            grid,
            out,
        } => commands::wavefunction(&problem, n, &t, grid.as_deref(), out.as_deref()),
        Command::Green { problem, t, grid, out } => commands::green(&problem, &t, grid.as_deref(), out.as_deref()),
        Command::Propagate {
            problem,
            n,
            t,
            grid,
            out,
        } => commands::propagate(&problem, n, &t, grid.as_deref(), out.as_deref()),
        Command::Transform {
            problem,
            kind,
            n,
            t,
            grid,
            v,
            x0,
            shift,
            phase,
            l,
            m,
            out,
        } => {
            let params = commands::ElementParams {
                v: problem::real(&v)?,
                x0: problem::real(&x0)?,
                shift: problem::real(&shift)?,
                phase: problem::real(&phase)?,
                l: problem::real(&l)?,
                m: problem::real(&m)?,
            };
            commands::transform(&problem, &kind, &params, n, &t, grid.as_deref(), out.as_deref())
        }
        Command::Density {
            problem,
            n,
            times,
            grid,
            out,
        } => commands::density(&problem, n, &times, grid.as_deref(), out.as_deref()),
        Command::Verify { scenario, out } => commands::verify(&scenario, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oscgroup: {e}");
            ExitCode::from(e.code())
        }
    }
}
