use thiserror::Error;

use crate::expr::{EvalError, ParseError};

/// Errors produced by the solver and its diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("function not resolved at degree {max_degree} (tail {tail:.3e}); input is probably not smooth")]
    Unresolved { max_degree: usize, tail: f64 },

    #[error("non-finite sample {value} at t = {at}")]
    NonFiniteSample { at: f64, value: f64 },

    #[error("point {0} lies outside [-1, 1]")]
    OutsideDomain(f64),

    #[error("too many sign changes ({found}, limit {limit}); oscillation is not resolved")]
    TooManySignChanges { found: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("theta undefined: {0}")]
    ThetaUndefined(String),

    #[error("hypotheses not satisfied: {0}")]
    HypothesesFailed(String),

    #[error("iterate {iteration} left the ball: sup norm {norm:.6e} > radius {radius:.6e}")]
    BallEscape {
        iteration: usize,
        norm: f64,
        radius: f64,
    },

    #[error("psi({at}) = {value} is outside [-1, 1]")]
    PsiOutOfRange { at: f64, value: f64 },

    #[error("root bracket could not be established: {0}")]
    Bracket(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("diagnostic failed: {0}")]
    Diagnostic(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
