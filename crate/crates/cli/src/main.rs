use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tribilliard_core::Stepper;

mod commands;
mod config;
mod expr;
mod output;
mod verify;

#[derive(Debug)]
pub enum CliError {
    /// Bad flag or argument value; exit code 2.
    Usage(String),
    /// A check ran and failed; exit code 1.
    Check(String),
    /// Anything else that stopped the run; exit code 1.
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Check(_) | CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<tribilliard_core::Error> for CliError {
    fn from(e: tribilliard_core::Error) -> Self {
        match e {
            tribilliard_core::Error::Domain(d) => CliError::Usage(d.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tribilliard",
    version,
    about = "Billiards in isosceles triangles near the 10/4 cylinder regime"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct AlphaArg {
    /// Base angle in radians; accepts expressions such as "pi*sqrt(3)/6".
    #[arg(long, default_value = "pi*sqrt(3)/6")]
    alpha: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical angles, breakpoint, rotation number and margin as JSON.
    Angles {
        #[command(flatten)]
        alpha: AlphaArg,
        /// Also include the ordering inequalities satisfied by phi*.
        #[arg(long)]
        inequalities: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Table of the length-5 vertex-to-vertex orbit.
    Diag {
        #[command(flatten)]
        alpha: AlphaArg,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Iterate the bounce map and write the trajectory CSV.
    Simulate {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, default_value = "1/sqrt(2)")]
        x0: String,
        /// Launch angle; defaults to phi* for the given alpha.
        #[arg(long)]
        phi0: Option<String>,
        /// Launch side (1 = base, 2 = right leg, 3 = left leg).
        #[arg(long, default_value_t = 1)]
        side: u8,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long, default_value_t = Stepper::Algebraic)]
        stepper: Stepper,
        /// CSV destination; stdout when omitted.
        #[arg(long, alias = "csv", short)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Check that the file just written replays within 1e-9.
        #[arg(long)]
        replay: bool,
    },
    /// Empirical first-return map, rotation estimate and rationality probe.
    Induced {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, default_value = "1/sqrt(2)")]
        x0: String,
        /// Number of first returns used for the rotation estimate.
        #[arg(long, default_value_t = 100_000)]
        returns: usize,
        /// Points at which the return map is sampled and compared.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 1_000_000)]
        q_max: u128,
        /// Bounces used for the margin statistics (0 skips them).
        #[arg(long, default_value_t = 100_000)]
        bounces: usize,
        #[arg(long, default_value_t = Stepper::Geometric)]
        stepper: Stepper,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suites over a grid of base angles.
    Verify {
        /// "auto:n" or "lo:hi:n".
        #[arg(long, default_value = "auto:25")]
        alpha_grid: String,
        /// Random samples per angle for the sampled suites.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the per-angle results as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Unfolded frames, diagonal and cylinder strips as SVG and JSON.
    Unfold {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, default_value = "1/sqrt(2)")]
        x0: String,
        /// Bounces of the unfolded trajectory from x0 at phi* (0 for none).
        #[arg(long, default_value_t = 0)]
        steps: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let tol = config::tolerances()?;
    match cli.command {
        Command::Angles {
            alpha,
            inequalities,
            out,
        } => commands::angles(
            config::parse_angle(&alpha.alpha)?,
            inequalities,
            out.as_deref(),
        ),
        Command::Diag { alpha, json } => commands::diag(config::parse_angle(&alpha.alpha)?, json),
        Command::Simulate {
            alpha,
            x0,
            phi0,
            side,
            steps,
            stepper,
            out,
            svg,
            replay,
        } => {
            let cfg = config::RunConfig {
                alpha: config::parse_angle(&alpha.alpha)?,
                x0: config::parse_number(&x0)?,
                phi0: phi0.as_deref().map(config::parse_number).transpose()?,
                steps,
                stepper,
                tolerances: tol,
                csv: out,
                svg,
            };
            commands::simulate(&cfg, side, replay)
        }
        Command::Induced {
            alpha,
            x0,
            returns,
            samples,
            q_max,
            bounces,
            stepper,
            out,
        } => commands::induced(
            &commands::InducedArgs {
                alpha: config::parse_angle(&alpha.alpha)?,
                x0: config::parse_number(&x0)?,
                returns,
                samples,
                q_max,
                bounces,
                stepper,
                tolerances: tol,
            },
            out.as_deref(),
        ),
        Command::Verify {
            alpha_grid,
            samples,
            seed,
            json,
        } => {
            let grid: config::GridSpec = alpha_grid.parse()?;
            verify::run(&grid.values(), samples, seed, tol, json.as_deref())
        }
        Command::Unfold {
            alpha,
            x0,
            steps,
            svg,
            json,
        } => commands::unfold(
            config::parse_angle(&alpha.alpha)?,
            config::parse_number(&x0)?,
            steps,
            tol,
            svg.as_deref(),
            json.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on bad flags by itself
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tribilliard: {e}");
            ExitCode::from(e.code())
        }
    }
}
