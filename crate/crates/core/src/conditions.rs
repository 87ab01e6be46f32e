//! Hypothesis checks and localisation of the invariant ball.
//!
//! With `L = ||a||_1`, `F = ||b + P(0) a||_1 + |c|` and the majorant `Pm` of
//! `P`, the existence conditions read
//!
//! ```text
//! (1)  L Pm'(0) < 1
//! (2)  0 < F < theta - Pm(theta) / Pm'(theta),   where L Pm'(theta) = 1
//! ```
//!
//! Under both, `H(r) = L Pm(r) + F - r` has exactly two positive roots
//! `r0 < theta < r1`; the closed ball of radius `r0` is mapped into itself by
//! the integral operator, which contracts there with constant `q = L Pm'(r0)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::Problem;

const THETA_WIDTH: f64 = 1e-14;
const RADIUS_WIDTH: f64 = 1e-13;
const MAX_BRACKET_DOUBLINGS: u32 = 60;

/// A root enclosed by an interval on which `H` changes sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootBracket {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    pub h_lo: f64,
    pub h_hi: f64,
}

impl RootBracket {
    pub fn changes_sign(&self) -> bool {
        self.h_lo == 0.0 || self.h_hi == 0.0 || (self.h_lo > 0.0) != (self.h_hi > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition2 {
    pub lhs: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Radii {
    pub r0: f64,
    pub r1: f64,
    pub r0_bracket: RootBracket,
    pub r1_bracket: RootBracket,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slacks {
    /// `1 - L Pm'(0)`.
    pub cond1: f64,
    /// `bound - lhs` of cond2.
    pub cond2: Option<f64>,
    /// `1 - q`.
    pub contraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionsReport {
    pub a_l1: f64,
    /// `||b + P(0) a||_1`, without `|c|`.
    pub forcing_l1: f64,
    pub cond1_lhs: f64,
    pub cond1_ok: bool,
    pub theta: Option<f64>,
    /// `theta - Pm(theta) / Pm'(theta)`, the right-hand bound of cond2.
    pub gap: Option<f64>,
    pub cond2_lhs: f64,
    pub cond2_ok: bool,
    pub r0: Option<f64>,
    pub r1: Option<f64>,
    /// Contraction constant `L Pm'(r0)`.
    pub q: Option<f64>,
    pub slacks: Slacks,
    pub r0_bracket: Option<RootBracket>,
    pub r1_bracket: Option<RootBracket>,
    pub cheb_tol: f64,
    /// Why theta or the radii are missing, when they are.
    pub notes: Vec<String>,
}

impl ConditionsReport {
    pub fn passed(&self) -> bool {
        self.cond1_ok && self.cond2_ok
    }
}

/// `||a||_1` and `||b + P(0) a||_1`, the only norms the conditions need.
#[derive(Debug, Clone, Copy)]
struct Norms {
    a_l1: f64,
    forcing_l1: f64,
}

impl Norms {
    fn compute(p: &Problem) -> Result<Norms> {
        Ok(Norms {
            a_l1: p.a_fun()?.l1_norm()?,
            forcing_l1: p.forcing_fun()?.l1_norm()?,
        })
    }
}

/// Condition (1): `(||a||_1 Pm'(0), ||a||_1 Pm'(0) < 1)`.
pub fn check_condition1(p: &Problem) -> Result<(f64, bool)> {
    let a_l1 = p.a_fun()?.l1_norm()?;
    Ok(condition1(p, a_l1))
}

fn condition1(p: &Problem, a_l1: f64) -> (f64, bool) {
    let lhs = a_l1 * p.poly.majorant_deriv_eval(0.0).unwrap_or(0.0);
    (lhs, lhs < 1.0)
}

/// The unique positive root of `||a||_1 Pm'(r) = 1`.
pub fn compute_theta(p: &Problem) -> Result<f64> {
    let a_l1 = p.a_fun()?.l1_norm()?;
    theta_for(p, a_l1)
}

fn theta_for(p: &Problem, a_l1: f64) -> Result<f64> {
    if a_l1 == 0.0 {
        return Err(Error::ThetaUndefined("||a||_1 = 0".into()));
    }
    if !p.poly.has_superlinear_part() {
        return Err(Error::ThetaUndefined("degenerate polynomial, majorant derivative is constant".into()));
    }
    let mpd = |r: f64| p.poly.majorant_deriv_eval(r).expect("r >= 0");
    let g = |r: f64| a_l1 * mpd(r) - 1.0;
    if g(0.0) >= 0.0 {
        return Err(Error::ThetaUndefined(format!(
            "cond1 fails: ||a||_1 Pm'(0) = {} >= 1",
            g(0.0) + 1.0
        )));
    }

    let mut hi = 1.0;
    let mut doublings = 0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 1000 {
            return Err(Error::Bracket("theta bracket expansion diverged".into()));
        }
    }
    let mut lo = 0.0;
    while hi - lo > THETA_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut theta = 0.5 * (lo + hi);

    // Newton polish on g, kept only if it improves the residual
    let slope = a_l1 * second_majorant_deriv(p, theta);
    if slope > 0.0 {
        let polished = theta - g(theta) / slope;
        if polished > 0.0 && g(polished).abs() < g(theta).abs() {
            theta = polished;
        }
    }
    Ok(theta)
}

fn second_majorant_deriv(p: &Problem, r: f64) -> f64 {
    p.poly
        .coeffs()
        .iter()
        .enumerate()
        .skip(2)
        .rev()
        .fold(0.0, |acc, (j, &a)| acc * r + (j * (j - 1)) as f64 * a.abs())
}

/// Condition (2) for a given theta.
pub fn check_condition2(p: &Problem, theta: f64) -> Result<Condition2> {
    let forcing_l1 = p.forcing_fun()?.l1_norm()?;
    condition2(p, forcing_l1, theta)
}

fn condition2(p: &Problem, forcing_l1: f64, theta: f64) -> Result<Condition2> {
    let lhs = forcing_l1 + p.c.abs();
    let bound = gap(p, theta)?;
    Ok(Condition2 {
        lhs,
        bound,
        ok: 0.0 < lhs && lhs < bound,
    })
}

fn gap(p: &Problem, theta: f64) -> Result<f64> {
    Ok(theta - p.poly.majorant_eval(theta)? / p.poly.majorant_deriv_eval(theta)?)
}

/// The two positive roots `r0 < theta < r1` of
/// `r = ||a||_1 Pm(r) + ||b + P(0) a||_1 + |c|`.
pub fn localize_radii(p: &Problem, theta: f64) -> Result<Radii> {
    let norms = Norms::compute(p)?;
    radii_for(p, norms, theta)
}

fn radii_for(p: &Problem, norms: Norms, theta: f64) -> Result<Radii> {
    let offset = norms.forcing_l1 + p.c.abs();
    let h = |r: f64| norms.a_l1 * p.poly.majorant_eval(r).expect("r >= 0") + offset - r;

    let h_theta = h(theta);
    if h_theta >= 0.0 {
        return Err(Error::Internal(format!(
            "H(theta) = {h_theta:e} >= 0 although cond2 was verified"
        )));
    }
    let h0 = h(0.0);
    if h0 <= 0.0 {
        return Err(Error::Bracket(format!("H(0) = {h0:e} is not positive")));
    }
    let r0_bracket = bisect_root(&h, 0.0, theta, h0, h_theta);

    let mut up = 2.0 * theta;
    let limit = theta * 2f64.powi(MAX_BRACKET_DOUBLINGS as i32);
    while h(up) <= 0.0 {
        up *= 2.0;
        if up > limit {
            return Err(Error::Bracket("r1 bracket expansion exceeded 2^60 theta".into()));
        }
    }
    let r1_bracket = bisect_root(&h, theta, up, h_theta, h(up));

    Ok(Radii {
        r0: r0_bracket.root,
        r1: r1_bracket.root,
        r0_bracket,
        r1_bracket,
    })
}

fn bisect_root(h: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut h_lo: f64, mut h_hi: f64) -> RootBracket {
    let lo_positive = h_lo > 0.0;
    while hi - lo > RADIUS_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = h(mid);
        if hm == 0.0 {
            return RootBracket {
                root: mid,
                lo: mid,
                hi: mid,
                h_lo: 0.0,
                h_hi: 0.0,
            };
        }
        if (hm > 0.0) == lo_positive {
            lo = mid;
            h_lo = hm;
        } else {
            hi = mid;
            h_hi = hm;
        }
    }
    // secant inside the final bracket
    let root = if h_hi != h_lo {
        (lo - h_lo * (hi - lo) / (h_hi - h_lo)).clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    };
    RootBracket {
        root,
        lo,
        hi,
        h_lo,
        h_hi,
    }
}

/// Full hypothesis analysis. Conditions that cannot be evaluated (theta
/// undefined, cond1 failing) leave the dependent fields empty and
/// record a note rather than failing.
pub fn analyze(p: &Problem) -> Result<ConditionsReport> {
    let norms = Norms::compute(p)?;
    let (cond1_lhs, cond1_ok) = condition1(p, norms.a_l1);
    let cond2_lhs = norms.forcing_l1 + p.c.abs();
    let mut report = ConditionsReport {
        a_l1: norms.a_l1,
        forcing_l1: norms.forcing_l1,
        cond1_lhs,
        cond1_ok,
        theta: None,
        gap: None,
        cond2_lhs,
        cond2_ok: false,
        r0: None,
        r1: None,
        q: None,
        slacks: Slacks {
            cond1: 1.0 - cond1_lhs,
            cond2: None,
            contraction: None,
        },
        r0_bracket: None,
        r1_bracket: None,
        cheb_tol: p.settings.cheb_tol,
        notes: Vec::new(),
    };

    let theta = match theta_for(p, norms.a_l1) {
        Ok(t) => t,
        Err(e) => {
            report.notes.push(e.to_string());
            return Ok(report);
        }
    };
    report.theta = Some(theta);
    let c2 = condition2(p, norms.forcing_l1, theta)?;
    report.gap = Some(c2.bound);
    report.cond2_ok = c2.ok;
    report.slacks.cond2 = Some(c2.bound - c2.lhs);

    if report.passed() {
        let radii = radii_for(p, norms, theta)?;
        let q = norms.a_l1 * p.poly.majorant_deriv_eval(radii.r0)?;
        report.r0 = Some(radii.r0);
        report.r1 = Some(radii.r1);
        report.q = Some(q);
        report.slacks.contraction = Some(1.0 - q);
        report.r0_bracket = Some(radii.r0_bracket);
        report.r1_bracket = Some(radii.r1_bracket);
    } else if !c2.ok {
        report.notes.push(if c2.lhs <= 0.0 {
            format!("cond2 fails: ||b + P(0) a||_1 + |c| = {} is not positive", c2.lhs)
        } else {
            format!("cond2 fails: {} >= {}", c2.lhs, c2.bound)
        });
    }
    Ok(report)
}
