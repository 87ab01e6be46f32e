//! Problem data: the polynomial nonlinearity, its majorant, and the full
//! instance `(a, b, psi, P, k, d, c)` with solver settings.

use serde::Serialize;

use crate::chebfun::{chebyshev_points, ChebFun, DEFAULT_MAX_DEGREE, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::expr::Expr;

/// Real polynomial `P(x) = sum a_j x^j`, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Trailing zero coefficients are dropped so the leading one is nonzero
    /// (the zero polynomial keeps a single `0`).
    pub fn new(mut coeffs: Vec<f64>) -> Result<Polynomial> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("polynomial needs at least one coefficient".into()));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite polynomial coefficient {bad}")));
        }
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        Ok(Polynomial { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    pub fn eval_complex(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(num_complex::Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    pub fn deriv_eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, &a)| acc * x + j as f64 * a)
    }

    /// Majorant `sum_{j>=1} |a_j| x^j` for `x >= 0`.
    pub fn majorant_eval(&self, x: f64) -> Result<f64> {
        check_nonnegative(x)?;
        Ok(self
            .coeffs
            .iter()
            .skip(1)
            .rev()
            .fold(0.0, |acc, &a| acc * x + a.abs())
            * x)
    }

    /// Derivative of the majorant, `sum_{j>=1} j |a_j| x^{j-1}`, for `x >= 0`.
    pub fn majorant_deriv_eval(&self, x: f64) -> Result<f64> {
        check_nonnegative(x)?;
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, &a)| acc * x + j as f64 * a.abs()))
    }

    /// True when the majorant derivative is non-constant, i.e. some
    /// `a_j != 0` with `j >= 2`.
    pub fn has_superlinear_part(&self) -> bool {
        self.coeffs.iter().skip(2).any(|&a| a != 0.0)
    }
}

fn check_nonnegative(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("majorant is defined for x >= 0, got {x}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSettings {
    /// Stopping tolerance on the sup-norm distance to the fixed point.
    pub solve_tol: f64,
    pub max_iter: usize,
    /// Relative truncation tolerance for every Chebyshev construction.
    pub cheb_tol: f64,
    pub max_degree: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            solve_tol: 1e-12,
            max_iter: 200,
            cheb_tol: DEFAULT_TOL,
            max_degree: DEFAULT_MAX_DEGREE,
        }
    }
}

/// An instance `y' = a P(y o psi) + b`, `y(d) = c` on [-1, 1].
#[derive(Debug, Clone)]
pub struct Problem {
    pub a: Expr,
    pub b: Expr,
    pub psi: Expr,
    pub poly: Polynomial,
    /// Gevrey index.
    pub k: f64,
    pub d: f64,
    pub c: f64,
    /// Width of a stadium around [-1, 1] where `a`, `b`, `psi` are analytic.
    pub mu: Option<f64>,
    pub settings: SolverSettings,
}

const PSI_GRID: usize = 4096;
const PSI_RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Worst offending `(t, value)` for sampled checks.
    pub worst: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl Problem {
    /// Parse the three data expressions and assemble an instance with
    /// default settings.
    pub fn from_strs(a: &str, b: &str, psi: &str, poly: Vec<f64>, k: f64, d: f64, c: f64) -> Result<Problem> {
        Ok(Problem {
            a: Expr::parse(a)?,
            b: Expr::parse(b)?,
            psi: Expr::parse(psi)?,
            poly: Polynomial::new(poly)?,
            k,
            d,
            c,
            mu: None,
            settings: SolverSettings::default(),
        })
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Problem {
        self.settings = settings;
        self
    }

    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();
        let mut warnings = Vec::new();

        checks.push(Check {
            name: "d_range",
            passed: (-1.0..=1.0).contains(&self.d),
            detail: if (-1.0..=1.0).contains(&self.d) {
                format!("d = {} in [-1, 1]", self.d)
            } else {
                format!("d outside [-1, 1]: d = {}", self.d)
            },
            worst: None,
        });
        checks.push(Check {
            name: "k_positive",
            passed: self.k > 0.0 && self.k.is_finite(),
            detail: format!("k = {}", self.k),
            worst: None,
        });
        checks.push(Check {
            name: "c_finite",
            passed: self.c.is_finite(),
            detail: format!("c = {}", self.c),
            worst: None,
        });
        if let Some(mu) = self.mu {
            checks.push(Check {
                name: "mu_positive",
                passed: mu > 0.0 && mu.is_finite(),
                detail: format!("mu = {mu}"),
                worst: None,
            });
        }
        let s = &self.settings;
        let settings_ok = s.solve_tol > 0.0
            && s.max_iter > 0
            && (1e-15..=1e-3).contains(&s.cheb_tol)
            && s.max_degree >= 16;
        checks.push(Check {
            name: "tolerances",
            passed: settings_ok,
            detail: format!(
                "solve_tol = {:e}, max_iter = {}, cheb_tol = {:e}, max_degree = {}",
                s.solve_tol, s.max_iter, s.cheb_tol, s.max_degree
            ),
            worst: None,
        });

        if self.poly.degree() < 2 {
            warnings.push(format!(
                "polynomial degree {} < 2: outside the scope of the existence theorem",
                self.poly.degree()
            ));
        }

        checks.push(self.psi_range_check());

        ValidationReport { checks, warnings }
    }

    fn psi_range_check(&self) -> Check {
        let mut worst = (0.0, 0.0);
        let mut worst_abs = f64::NEG_INFINITY;
        for t in chebyshev_points(PSI_GRID) {
            match self.psi.eval_real(t) {
                Ok(v) => {
                    if v.abs() > worst_abs {
                        worst_abs = v.abs();
                        worst = (t, v);
                    }
                }
                Err(e) => {
                    return Check {
                        name: "psi_range",
                        passed: false,
                        detail: format!("psi not evaluable at t = {t}: {e}"),
                        worst: Some((t, f64::NAN)),
                    }
                }
            }
        }
        let passed = worst_abs <= 1.0 + PSI_RANGE_SLACK;
        Check {
            name: "psi_range",
            passed,
            detail: if passed {
                format!("max |psi| = {worst_abs} on the {}-point grid", PSI_GRID + 1)
            } else {
                format!("psi leaves [-1, 1]: psi({}) = {}", worst.0, worst.1)
            },
            worst: Some(worst),
        }
    }

    fn build(&self, f: impl FnMut(f64) -> Result<f64>) -> Result<ChebFun> {
        ChebFun::build(f, self.settings.cheb_tol, self.settings.max_degree)
    }

    pub fn a_fun(&self) -> Result<ChebFun> {
        self.build(|t| Ok(self.a.eval_real(t)?))
    }

    pub fn b_fun(&self) -> Result<ChebFun> {
        self.build(|t| Ok(self.b.eval_real(t)?))
    }

    /// `t -> b(t) + P(0) a(t)`.
    pub fn forcing_fun(&self) -> Result<ChebFun> {
        let p0 = self.poly.constant_term();
        ChebFun::build_summed(
            |t| {
                let (b, pa) = (self.b.eval_real(t)?, p0 * self.a.eval_real(t)?);
                Ok((b + pa, b.abs() + pa.abs()))
            },
            self.settings.cheb_tol,
            self.settings.max_degree,
        )
    }

    pub fn psi_fun(&self) -> Result<ChebFun> {
        self.build(|t| Ok(self.psi.eval_real(t)?))
    }

    /// `psi(t)` clamped into [-1, 1]; values beyond the validation slack are
    /// an error.
    pub fn psi_clamped(&self, t: f64) -> Result<f64> {
        let v = self.psi.eval_real(t)?;
        if v.abs() > 1.0 + PSI_RANGE_SLACK {
            return Err(Error::PsiOutOfRange { at: t, value: v });
        }
        Ok(v.clamp(-1.0, 1.0))
    }

    /// The given `mu`, or the smallest analyticity width estimated from the
    /// Chebyshev coefficient decay of `a`, `b` and `psi`.
    pub fn mu_or_estimate(&self) -> Result<f64> {
        if let Some(mu) = self.mu {
            return Ok(mu);
        }
        let width = [self.a_fun()?, self.b_fun()?, self.psi_fun()?]
            .iter()
            .map(ChebFun::analyticity_width)
            .fold(f64::INFINITY, f64::min);
        if width.is_finite() && width > 0.0 {
            Ok(width)
        } else if width.is_infinite() {
            // all three are low-degree polynomials, hence entire
            Ok(1.0)
        } else {
            Err(Error::InvalidProblem("analyticity width mu could not be estimated".into()))
        }
    }
}
