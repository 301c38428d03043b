use std::fmt;

use crate::geometry::Side;

/// A value fell outside the interval on which an operation is defined.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainError {
    pub quantity: &'static str,
    pub value: f64,
    /// Human readable form of the violated bound, e.g. `"alpha < pi/2"`.
    pub bound: String,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} violates {}",
            self.quantity, self.value, self.bound
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(DomainError),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("root bracket [{lo}, {hi}] has no sign change (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("orbit is singular; operation requires a regular orbit")]
    SingularOrbit,

    #[error("template mismatch at step {step}: {detail}")]
    TemplateMismatch { step: usize, detail: String },

    #[error("no return to side {side} at the induction angle within {max_steps} steps")]
    NoReturn { side: Side, max_steps: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(quantity: &'static str, value: f64, bound: impl Into<String>) -> Error {
    Error::Domain(DomainError {
        quantity,
        value,
        bound: bound.into(),
    })
}
