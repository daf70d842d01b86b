use std::path::PathBuf;

use thiserror::Error;

/// Which configuration knob dominates the error budget when a certification
/// fails. Raising the named knob (and re-running) is the cheapest fix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BindingKnob {
    /// The Euler-Maclaurin remainder dominates: raise `mu` (or `m`).
    MuOrM,
    /// The rounded initial sum dominates: raise `n_decimals`.
    NDecimals,
    /// The quadrature's own error dominates: raise `working_digits`.
    WorkingDigits,
}

impl std::fmt::Display for BindingKnob {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BindingKnob::MuOrM => write!(f, "mu or m"),
            BindingKnob::NDecimals => write!(f, "n_decimals"),
            BindingKnob::WorkingDigits => write!(f, "working_digits"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// The certified error bound swallows every digit of the value.
    #[error("no significant digits: |value| does not exceed its error bound")]
    NoSignificantDigits,

    /// Fewer than two significant digits survive mantissa extraction.
    #[error("insufficient precision: fewer than 2 digits remain after removing the exponent")]
    InsufficientPrecision,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("quadrature did not converge after {refinements} refinements")]
    QuadratureDidNotConverge { refinements: u32 },

    #[error("root finding did not converge within the iteration limit")]
    RootDidNotConverge,

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// `|s(m-1) + phi(m,n) - a0| > |R~|` failed; the margin is too small for
    /// the current parameters.
    #[error("certification criterion failed for a0 = {a0}: margin {margin} <= bound {bound}; binding knob: {binding}")]
    CriterionFailed {
        a0: u32,
        margin: String,
        bound: String,
        binding: BindingKnob,
    },

    /// The regime conditions (sum exceedance) do not hold.
    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// Exact-arithmetic paths refuse inputs beyond desk scale.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("cache error at {path}: {message}")]
    Cache { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
