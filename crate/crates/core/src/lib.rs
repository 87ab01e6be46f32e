//! Constructive solver for the functional differential equation
//!
//! ```text
//! y'(x) = a(x) P(y(psi(x))) + b(x),    y(d) = c,    x in [-1, 1]
//! ```
//!
//! where `a`, `b`, `psi` are analytic, `psi` maps [-1, 1] into itself and
//! `P` is a real polynomial. The crate checks the sufficient conditions for
//! a solution in a Gevrey class, builds that solution as the fixed point of
//! the integral operator by Picard iteration on Chebyshev series, and
//! offers complex-analytic diagnostics (the `E(k)` self-map property of
//! `psi`, the omega-sequence envelope, stadium inclusion of iterates, and a
//! derivative-growth estimate of the Gevrey order).

// Negated float comparisons below are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chebfun;
pub mod cli;
pub mod conditions;
pub mod error;
pub mod expr;
pub mod gevrey;
pub mod picard;
pub mod problem;

pub use chebfun::ChebFun;
pub use conditions::ConditionsReport;
pub use error::{Error, Result};
pub use expr::Expr;
pub use picard::{SolveOptions, Solution};
pub use problem::{Polynomial, Problem, SolverSettings};
