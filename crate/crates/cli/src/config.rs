//! Argument values shared by the subcommands.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;
use std::str::FromStr;

use tribilliard_core::angles::{admissible_grid, linspace};
use tribilliard_core::{Stepper, Tolerances};

use crate::expr;
use crate::CliError;

pub const TOL_ENV: &str = "TRIBILLIARD_TOL_OVERRIDE";

/// Inset applied to both ends of the admissible interval by `auto:n`.
pub const GRID_INSET: f64 = 1e-3;

pub fn parse_angle(src: &str) -> Result<f64, CliError> {
    let v = expr::eval(src).map_err(|e| CliError::Usage(format!("cannot parse {src:?}: {e}")))?;
    if !(v > 0.0 && v < FRAC_PI_2) {
        return Err(CliError::Usage(format!(
            "alpha = {v} must satisfy 0 < alpha < pi/2"
        )));
    }
    Ok(v)
}

pub fn parse_number(src: &str) -> Result<f64, CliError> {
    expr::eval(src).map_err(|e| CliError::Usage(format!("cannot parse {src:?}: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Auto(usize),
    Range { lo: f64, hi: f64, n: usize },
}

impl FromStr for GridSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let count = |t: &str| -> Result<usize, CliError> {
            let n: usize = t
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("grid size {t:?} is not an integer")))?;
            if n < 2 {
                return Err(CliError::Usage(format!("grid needs n >= 2, got {n}")));
            }
            Ok(n)
        };
        match parts.as_slice() {
            [auto, n] if auto.trim() == "auto" => Ok(GridSpec::Auto(count(n)?)),
            [lo, hi, n] => {
                let (lo, hi) = (parse_angle(lo)?, parse_angle(hi)?);
                if lo >= hi {
                    return Err(CliError::Usage(format!(
                        "grid needs lo < hi, got {lo} >= {hi}"
                    )));
                }
                Ok(GridSpec::Range {
                    lo,
                    hi,
                    n: count(n)?,
                })
            }
            _ => Err(CliError::Usage(format!(
                "grid {s:?} is neither lo:hi:n nor auto:n"
            ))),
        }
    }
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            GridSpec::Auto(n) => admissible_grid(n, GRID_INSET),
            GridSpec::Range { lo, hi, n } => linspace(lo, hi, n),
        }
    }
}

/// Tolerances after applying the JSON map in [`TOL_ENV`], if set.
pub fn tolerances() -> Result<Tolerances, CliError> {
    match std::env::var(TOL_ENV) {
        Ok(json) if !json.trim().is_empty() => Tolerances::default()
            .with_json_overrides(&json)
            .map_err(|e| CliError::Usage(format!("{TOL_ENV}: {e}"))),
        _ => Ok(Tolerances::default()),
    }
}

/// Everything `simulate` needs for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub x0: f64,
    /// Launch angle; `None` means the critical angle for `alpha`.
    pub phi0: Option<f64>,
    pub steps: usize,
    pub stepper: Stepper,
    pub tolerances: Tolerances,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}
