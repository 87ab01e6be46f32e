//! Picard iteration for the integral operator
//!
//! ```text
//! T(f)(x) = c + int_d^x a(t) P(f(psi(t))) dt + int_d^x b(t) dt
//! ```
//!
//! started from `f_1 = 0`. Each iterate is a freshly built Chebyshev series.
//! Inside the ball of radius `r0` the operator contracts with constant `q`,
//! so `||u - f_n|| <= q / (1 - q) ||f_n - f_{n-1}||` drives the stopping
//! test.

use serde::Serialize;

use crate::chebfun::{chebyshev_points, ChebFun};
use crate::conditions::ConditionsReport;
use crate::error::{Error, Result};
use crate::problem::Problem;

const BALL_SLACK: f64 = 1e-10;
const RESIDUAL_GRID: usize = 2048;

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Iterate even when the hypotheses fail, monitoring a heuristic ball.
    pub force: bool,
    /// Retain every iterate `f_1, f_2, ...` in the solution.
    pub keep_iterates: bool,
    /// Starting function; zero when absent.
    pub start: Option<ChebFun>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: ChebFun,
    /// Number of operator applications performed.
    pub iterations: usize,
    /// `||f_{n+1} - f_n||_inf` for each application.
    pub increments: Vec<f64>,
    pub q_used: f64,
    pub r0_used: f64,
    pub residual_sup: f64,
    pub converged: bool,
    /// Set for forced runs outside the hypotheses of the existence theorem.
    pub out_of_theorem: bool,
    /// A-priori iteration count from the contraction estimate.
    pub n_required: Option<u64>,
    /// Bernstein ellipse parameter fitted to the coefficient decay of `u`.
    pub decay_rate: f64,
    pub iterates: Vec<ChebFun>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub iterations: usize,
    pub increments: Vec<f64>,
    pub q_used: f64,
    pub r0_used: f64,
    pub residual_sup: f64,
    pub converged: bool,
    pub out_of_theorem: bool,
    pub n_required: Option<u64>,
    pub degree: usize,
    pub decay_rate: f64,
    pub u_at_d: f64,
    pub sup_norm: f64,
    pub warnings: Vec<String>,
}

impl Solution {
    pub fn summary(&self, d: f64) -> SolveSummary {
        SolveSummary {
            iterations: self.iterations,
            increments: self.increments.clone(),
            q_used: self.q_used,
            r0_used: self.r0_used,
            residual_sup: self.residual_sup,
            converged: self.converged,
            out_of_theorem: self.out_of_theorem,
            n_required: self.n_required,
            degree: self.u.degree(),
            decay_rate: self.decay_rate,
            u_at_d: self.u.eval(d).unwrap_or(f64::NAN),
            sup_norm: self.u.sup_norm(),
            warnings: self.warnings.clone(),
        }
    }

    /// Ratios `increments[n] / increments[n-1]`.
    pub fn increment_ratios(&self) -> Vec<f64> {
        self.increments.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// One application of the integral operator.
pub fn apply_operator(f: &ChebFun, p: &Problem) -> Result<ChebFun> {
    let integrand = ChebFun::build_summed(
        |t| {
            let y = f.eval_unchecked(p.psi_clamped(t)?);
            let (ap, b) = (p.a.eval_real(t)? * p.poly.eval(y), p.b.eval_real(t)?);
            Ok((ap + b, ap.abs() + b.abs()))
        },
        p.settings.cheb_tol,
        p.settings.max_degree,
    )?;
    let anti = integrand.antiderivative();
    let shift = p.c - anti.eval(p.d)?;
    Ok(anti.shifted(shift))
}

/// Pointwise defect `|u'(x) - a(x) P(u(psi(x))) - b(x)|` given `du = u'`.
pub fn residual_at(u: &ChebFun, du: &ChebFun, p: &Problem, x: f64) -> Result<f64> {
    let y = u.eval_unchecked(p.psi_clamped(x)?);
    let rhs = p.a.eval_real(x)? * p.poly.eval(y) + p.b.eval_real(x)?;
    Ok((du.eval(x)? - rhs).abs())
}

/// Sup of the equation defect over a 2049-point Chebyshev grid.
pub fn residual(u: &ChebFun, p: &Problem) -> Result<f64> {
    let du = u.differentiate();
    chebyshev_points(RESIDUAL_GRID)
        .into_iter()
        .try_fold(0.0f64, |m, x| Ok(m.max(residual_at(u, &du, p, x)?)))
}

/// Picard iteration from `f_1` until the contraction-based error bound
/// drops below `solve_tol`.
pub fn solve(p: &Problem, report: &ConditionsReport, opts: &SolveOptions) -> Result<Solution> {
    let mut warnings = Vec::new();
    let in_theorem = report.passed();
    let (r0, q) = match (in_theorem, report.r0, report.q) {
        (true, Some(r0), Some(q)) => (r0, q),
        _ if opts.force => {
            let r0 = 2.0 * (report.forcing_l1 + p.c.abs());
            let q = report.a_l1 * p.poly.majorant_deriv_eval(r0)?;
            warnings.push(format!(
                "hypotheses not satisfied; forced run monitors the heuristic radius {r0:e}"
            ));
            (r0, q)
        }
        _ => {
            let why = if report.notes.is_empty() {
                "existence conditions not satisfied".to_string()
            } else {
                report.notes.join("; ")
            };
            return Err(Error::HypothesesFailed(why));
        }
    };

    let tol = p.settings.solve_tol;
    let threshold = if q < 1.0 { tol * (1.0 - q) } else { tol };

    let mut f = opts.start.clone().unwrap_or_else(|| ChebFun::constant(0.0));
    let start_norm = f.sup_norm();
    if start_norm > r0 + BALL_SLACK {
        return Err(Error::BallEscape {
            iteration: 1,
            norm: start_norm,
            radius: r0,
        });
    }
    let mut iterates = Vec::new();
    if opts.keep_iterates {
        iterates.push(f.clone());
    }
    let mut increments = Vec::new();
    let mut converged = false;
    for n in 1..=p.settings.max_iter {
        let next = apply_operator(&f, p)?;
        let inc = next.sub(&f).sup_norm();
        increments.push(inc);
        let norm = next.sup_norm();
        if norm > r0 + BALL_SLACK {
            return Err(Error::BallEscape {
                iteration: n + 1,
                norm,
                radius: r0,
            });
        }
        f = next;
        if opts.keep_iterates {
            iterates.push(f.clone());
        }
        if inc <= threshold {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!(
            "no convergence after {} iterations (last increment {:e}, threshold {threshold:e})",
            p.settings.max_iter,
            increments.last().copied().unwrap_or(f64::NAN)
        ));
    }

    let n_required = match increments.first() {
        Some(&first) if first > 0.0 && q > 0.0 && q < 1.0 => {
            let n = ((tol * (1.0 - q) / first).ln() / q.ln()).ceil();
            Some(n.max(0.0) as u64)
        }
        _ => None,
    };
    let residual_sup = residual(&f, p)?;
    let decay_rate = f.ellipse();
    Ok(Solution {
        iterations: increments.len(),
        increments,
        q_used: q,
        r0_used: r0,
        residual_sup,
        converged,
        out_of_theorem: !in_theorem,
        n_required,
        decay_rate,
        u: f,
        iterates,
        warnings,
    })
}
