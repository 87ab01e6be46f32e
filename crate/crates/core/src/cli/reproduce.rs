//! Reruns of the two built-in examples against their reference values.

use std::fmt;

use clap::ValueEnum;
use serde::Serialize;

use crate::conditions::analyze;
use crate::gevrey::check_ek;
use crate::picard::{solve, SolveOptions};
use crate::problem::Problem;

use super::input::{ProblemFile, EXAMPLE1, EXAMPLE2};

/// Reference bracket for theta(P, a) of example 2.
pub const EXAMPLE2_THETA: (f64, f64) = (0.1020416497, 0.1020416498);
/// Reference bracket for theta - Pm(theta) / Pm'(theta) of example 2.
pub const EXAMPLE2_GAP: (f64, f64) = (0.0289635672, 0.0289635673);
pub const EXAMPLE2_COND1: f64 = 0.375;
pub const EXAMPLE2_COND2: f64 = 0.02;
pub const EXAMPLE2_U_AT_D: f64 = 0.01;

/// `A` and `p_max` of the E(1) check on `psi = sin`.
const EK_A: [f64; 1] = [0.5];
const EK_PMAX: u64 = 100;
const EK_DENSITY: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Example1,
    Example2,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    Note,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Note => "NOTE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Line {
    pub status: Status,
    pub example: &'static str,
    /// Short machine-friendly key, e.g. `theta`.
    pub key: &'static str,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Reproduction {
    pub lines: Vec<Line>,
}

impl Reproduction {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.status != Status::Fail)
    }

    pub fn find(&self, example: &str, key: &str) -> Option<&Line> {
        self.lines.iter().find(|l| l.example == example && l.key == key)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            s.push_str(&format!("{} {} {}: {}\n", l.status, l.example, l.key, l.text));
        }
        let fails = self.lines.iter().filter(|l| l.status == Status::Fail).count();
        s.push_str(&format!(
            "{} assertions, {} failed\n",
            self.lines.iter().filter(|l| l.status != Status::Note).count(),
            fails
        ));
        s
    }
}

struct Suite {
    example: &'static str,
    lines: Vec<Line>,
}

impl Suite {
    fn check(&mut self, key: &'static str, ok: bool, text: String) {
        self.lines.push(Line {
            status: if ok { Status::Pass } else { Status::Fail },
            example: self.example,
            key,
            text,
        });
    }

    fn note(&mut self, key: &'static str, text: String) {
        self.lines.push(Line {
            status: Status::Note,
            example: self.example,
            key,
            text,
        });
    }

    fn error(&mut self, key: &'static str, e: impl fmt::Display) {
        self.check(key, false, format!("error: {e}"));
    }
}

pub fn reproduce(which: Which) -> Reproduction {
    let mut lines = Vec::new();
    if matches!(which, Which::Example1 | Which::All) {
        lines.extend(example1());
    }
    if matches!(which, Which::Example2 | Which::All) {
        lines.extend(example2());
    }
    Reproduction { lines }
}

fn load(text: &str) -> crate::Result<Problem> {
    ProblemFile::from_json(text)?.to_problem()
}

fn in_open(x: Option<f64>, (lo, hi): (f64, f64)) -> bool {
    x.is_some_and(|x| lo < x && x < hi)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".into(), |v| format!("{v:?}"))
}

/// Solve and E(1) checks shared by both examples.
fn solve_and_ek(suite: &mut Suite, p: &Problem, u_at_d: f64) {
    let report = match analyze(p) {
        Ok(r) => r,
        Err(e) => return suite.error("solve", e),
    };
    match solve(p, &report, &SolveOptions::default()) {
        Ok(sol) => {
            suite.check(
                "converged",
                sol.converged,
                format!("Picard iteration converged in {} iterations", sol.iterations),
            );
            let ud = sol.u.eval(p.d).unwrap_or(f64::NAN);
            suite.check(
                "u_at_d",
                (ud - u_at_d).abs() <= 1e-12,
                format!("u({}) = {u_at_d:?} +/- 1e-12 (got {ud:?})", p.d),
            );
            suite.check(
                "residual",
                sol.residual_sup <= 1e-10,
                format!("residual sup <= 1e-10 (got {:e})", sol.residual_sup),
            );
        }
        Err(e) => suite.error("solve", e),
    }
    match check_ek(&p.psi, p.k, &EK_A, EK_PMAX, EK_DENSITY) {
        Ok(ek) => suite.check(
            "ek",
            ek.pass,
            format!(
                "psi = {} passes sampled E({}) for A = {:?}, p <= {EK_PMAX}",
                ek.psi, p.k, EK_A[0]
            ),
        ),
        Err(e) => suite.error("ek", e),
    }
}

/// `a = t`, `b = 0.1 cosh t`, `psi = sin`, `P = x^3`, `d = c = 0`; the
/// family parameters are alpha = 1, N = 1, beta = 0.1, gamma = 1.
fn example1() -> Vec<Line> {
    let mut suite = Suite {
        example: "example1",
        lines: Vec::new(),
    };
    let p = match load(EXAMPLE1) {
        Ok(p) => p,
        Err(e) => {
            suite.error("load", e);
            return suite.lines;
        }
    };
    let report = match analyze(&p) {
        Ok(r) => r,
        Err(e) => {
            suite.error("conditions", e);
            return suite.lines;
        }
    };
    let theta_ref = (1.0f64 / 3.0).sqrt();
    suite.check(
        "theta",
        report.theta.is_some_and(|t| (t - theta_ref).abs() <= 1e-12),
        format!("theta = sqrt(1/3) +/- 1e-12 (got {})", fmt_opt(report.theta)),
    );
    let lhs_ref = 0.2 * 1f64.sinh();
    suite.check(
        "cond2_lhs",
        (report.cond2_lhs - lhs_ref).abs() <= 1e-12,
        format!("cond2 lhs = 0.2 sinh 1 +/- 1e-12 (got {:?})", report.cond2_lhs),
    );
    let bound_ref = (1.0f64 / 12.0).sqrt();
    suite.check(
        "lhs_below_bound",
        report.cond2_lhs < bound_ref,
        format!("0.2 sinh 1 < sqrt(1/12) = {bound_ref:?}"),
    );
    suite.check(
        "conditions",
        report.passed(),
        format!(
            "conditions hold (cond1 lhs {:?}, cond2 lhs {:?} < {})",
            report.cond1_lhs,
            report.cond2_lhs,
            fmt_opt(report.gap)
        ),
    );
    if let Some(gap) = report.gap {
        if (gap - bound_ref).abs() > 1e-12 {
            suite.note(
                "bound",
                format!(
                    "theta - Pm(theta)/Pm'(theta) = 2 theta / 3 = {gap:?}, not the closed form sqrt(1/12) = {bound_ref:?}"
                ),
            );
        }
    }
    solve_and_ek(&mut suite, &p, 0.0);
    suite.lines
}

/// `a = 2 ln2 2^t`, `b = (301 ln2 / 150) 2^t`, `psi = sin`,
/// `P = x^4 - x^2 + x/8 - 1`, `d = 0`, `c = 1/100`.
fn example2() -> Vec<Line> {
    let mut suite = Suite {
        example: "example2",
        lines: Vec::new(),
    };
    let p = match load(EXAMPLE2) {
        Ok(p) => p,
        Err(e) => {
            suite.error("load", e);
            return suite.lines;
        }
    };
    let report = match analyze(&p) {
        Ok(r) => r,
        Err(e) => {
            suite.error("conditions", e);
            return suite.lines;
        }
    };
    suite.check(
        "theta",
        in_open(report.theta, EXAMPLE2_THETA),
        format!(
            "theta in ({:?}, {:?}) (got {})",
            EXAMPLE2_THETA.0,
            EXAMPLE2_THETA.1,
            fmt_opt(report.theta)
        ),
    );
    suite.check(
        "gap",
        in_open(report.gap, EXAMPLE2_GAP),
        format!(
            "theta - Pm(theta)/Pm'(theta) in ({:?}, {:?}) (got {})",
            EXAMPLE2_GAP.0,
            EXAMPLE2_GAP.1,
            fmt_opt(report.gap)
        ),
    );
    suite.check(
        "cond1_lhs",
        (report.cond1_lhs - EXAMPLE2_COND1).abs() <= 1e-12,
        format!("cond1 lhs = 0.375 +/- 1e-12 (got {:?})", report.cond1_lhs),
    );
    suite.check(
        "cond2_lhs",
        (report.cond2_lhs - EXAMPLE2_COND2).abs() <= 1e-10,
        format!("cond2 lhs = 0.02 +/- 1e-10 (got {:?})", report.cond2_lhs),
    );
    suite.check(
        "conditions",
        report.passed(),
        format!(
            "conditions hold (cond2 lhs {:?} < {})",
            report.cond2_lhs,
            fmt_opt(report.gap)
        ),
    );
    suite.note(
        "b",
        "b = (301 ln2/150) 2^t; the alternative (9 ln2/500) 2^t does not give cond2 lhs = 0.02".into(),
    );
    solve_and_ek(&mut suite, &p, EXAMPLE2_U_AT_D);
    suite.lines
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_counts_failures() {
        let r = Reproduction {
            lines: vec![
                Line {
                    status: Status::Pass,
                    example: "x",
                    key: "a",
                    text: "ok".into(),
                },
                Line {
                    status: Status::Note,
                    example: "x",
                    key: "n",
                    text: "info".into(),
                },
            ],
        };
        assert!(r.passed());
        assert!(r.render().ends_with("1 assertions, 0 failed\n"));
        assert!(r.find("x", "n").is_some());
    }
}
