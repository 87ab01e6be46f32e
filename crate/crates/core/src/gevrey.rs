//! Complex-analytic and regularity diagnostics.
//!
//! * stadium regions `[-1,1]_{k,A,n} = [-1,1] + B(0, A n^{-1/k})` and the
//!   distance to `[-1, 1]`;
//! * a sampling check of the `E(k)` property
//!   `psi([-1,1]_{k,A,p+1}) ⊂ [-1,1]_{k,A,p}`;
//! * the omega sequence with its envelope constant, the function Lambda, and
//!   a probe of the inclusion `F_n([-1,1]_{k,s,n}) ⊂ [-r0,r0]_{k,Cs,n}` for
//!   the analytic continuations of the Picard iterates;
//! * derivative sup-norms and a fit of their growth against the Gevrey
//!   envelope `B^{j+1} j^{j(1+1/k)}`.
//!
//! Everything here samples on fixed grids. The checks are numerical
//! evidence, not proofs.

use num_complex::Complex64;
use serde::Serialize;

use crate::chebfun::{chebyshev_points, ChebFun};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::problem::Problem;

pub const DEFAULT_DENSITY: usize = 512;
const EK_SLACK: f64 = 1e-12;
const PATH_PANELS: usize = 512;
const ENVELOPE_GRID: usize = 2000;
const MAX_DERIVATIVES: usize = 12;
const CONDITIONING_RATIO: f64 = 1e-4;
const ANALYTIC_SLOPE: f64 = 1.05;

/// Distance from `z` to `[-1, 1]` and the closest point of the interval.
pub fn dist_to_interval(z: Complex64) -> (f64, f64) {
    dist_to_segment(z, 1.0)
}

/// Distance from `z` to `[-r, r]` and the closest point.
pub fn dist_to_segment(z: Complex64, r: f64) -> (f64, f64) {
    let zhat = z.re.clamp(-r, r);
    ((z.re.abs() - r).max(0.0).hypot(z.im), zhat)
}

/// The open set `[-1, 1] + B(0, A n^{-1/k})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StadiumRegion {
    pub k: f64,
    pub a: f64,
    pub n: u64,
}

impl StadiumRegion {
    pub fn new(k: f64, a: f64, n: u64) -> Result<StadiumRegion> {
        if !(k > 0.0 && a > 0.0 && n >= 1) {
            return Err(Error::InvalidArgument(format!(
                "stadium needs k > 0, A > 0, n >= 1 (got k = {k}, A = {a}, n = {n})"
            )));
        }
        Ok(StadiumRegion { k, a, n })
    }

    pub fn radius(&self) -> f64 {
        self.a * (self.n as f64).powf(-1.0 / self.k)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        dist_to_interval(z).0 < self.radius()
    }

    pub fn samples(&self, boundary: usize, interior: usize) -> Vec<Complex64> {
        stadium_samples(self.radius(), boundary, interior)
    }
}

/// Points on the closure of the stadium of radius `r`: `boundary` points on
/// each of the two caps and two horizontal segments, plus roughly
/// `interior` points of a rectangular grid inside.
pub fn stadium_samples(r: f64, boundary: usize, interior: usize) -> Vec<Complex64> {
    use std::f64::consts::PI;
    let b = boundary.max(2);
    let mut pts = Vec::with_capacity(4 * b + interior + 8);
    for i in 0..b {
        let s = i as f64 / (b - 1) as f64;
        let right = -PI / 2.0 + PI * s;
        let left = PI / 2.0 + PI * s;
        pts.push(Complex64::new(1.0, 0.0) + Complex64::from_polar(r, right));
        pts.push(Complex64::new(-1.0, 0.0) + Complex64::from_polar(r, left));
        let x = -1.0 + 2.0 * s;
        pts.push(Complex64::new(x, r));
        pts.push(Complex64::new(x, -r));
    }
    if interior > 0 {
        let aspect = (2.0 + 2.0 * r) / (2.0 * r);
        let ny = ((interior as f64 / aspect).sqrt().ceil() as usize).max(3) | 1;
        let nx = (interior / ny).max(3);
        for i in 0..nx {
            let x = -1.0 - r + (2.0 + 2.0 * r) * (i + 1) as f64 / (nx + 1) as f64;
            for j in 0..ny {
                let y = -r + 2.0 * r * (j + 1) as f64 / (ny + 1) as f64;
                let z = Complex64::new(x, y);
                if dist_to_interval(z).0 < r {
                    pts.push(z);
                }
            }
        }
    }
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EkEntry {
    pub a: f64,
    pub p: u64,
    /// `max rho(psi(z), [-1,1])` over the samples of region `(k, A, p+1)`.
    pub worst_distance: f64,
    /// `worst_distance / (A p^{-1/k})`.
    pub ratio: f64,
    pub worst_point: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EkReport {
    pub psi: String,
    pub k: f64,
    pub a_values: Vec<f64>,
    pub p_max: u64,
    pub boundary_density: usize,
    pub interior_points: usize,
    pub entries: Vec<EkEntry>,
    pub pass: bool,
    /// Largest tested `A` whose inclusions hold for every tested `p`.
    pub tau_candidate: Option<f64>,
    /// Per `A`: smallest `p` from which every tested inclusion holds.
    pub n_of_a: Vec<Option<u64>>,
}

/// Sampling check of `psi([-1,1]_{k,A,p+1}) ⊂ [-1,1]_{k,A,p}` for every
/// `A` in `a_list` and `p = 1..=p_max`.
pub fn check_ek(psi: &Expr, k: f64, a_list: &[f64], p_max: u64, density: usize) -> Result<EkReport> {
    if a_list.is_empty() || a_list.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument("A values must be positive".into()));
    }
    if p_max < 1 {
        return Err(Error::InvalidArgument("p_max must be at least 1".into()));
    }
    let interior = 2 * density;
    let mut entries = Vec::with_capacity(a_list.len() * p_max as usize);
    let mut n_of_a = Vec::with_capacity(a_list.len());
    let mut tau_candidate: Option<f64> = None;
    for &a in a_list {
        let mut first_good: Option<u64> = None;
        for p in 1..=p_max {
            let region = StadiumRegion::new(k, a, p + 1)?;
            let mut worst = (0.0, Complex64::new(0.0, 0.0));
            for z in region.samples(density, interior) {
                let w = psi.eval_complex(z)?;
                let dist = dist_to_interval(w).0;
                if dist > worst.0 {
                    worst = (dist, z);
                }
            }
            let ratio = worst.0 / (a * (p as f64).powf(-1.0 / k));
            if ratio <= 1.0 + EK_SLACK {
                first_good.get_or_insert(p);
            } else {
                first_good = None;
            }
            entries.push(EkEntry {
                a,
                p,
                worst_distance: worst.0,
                ratio,
                worst_point: (worst.1.re, worst.1.im),
            });
        }
        if first_good == Some(1) {
            tau_candidate = Some(tau_candidate.map_or(a, |t| t.max(a)));
        }
        n_of_a.push(first_good);
    }
    let pass = entries.iter().all(|e| e.ratio <= 1.0 + EK_SLACK);
    Ok(EkReport {
        psi: psi.to_string(),
        k,
        a_values: a_list.to_vec(),
        p_max,
        boundary_density: density,
        interior_points: interior,
        entries,
        pass,
        tau_candidate,
        n_of_a,
    })
}

fn sup_on_stadium(radius: f64, density: usize, mut f: impl FnMut(Complex64) -> Result<f64>) -> Result<f64> {
    stadium_samples(radius, density, 2 * density)
        .into_iter()
        .try_fold(0.0f64, |m, z| Ok(m.max(f(z)?)))
}

/// Data behind the omega sequence: complex sup norms on the stadium of
/// radius `mu / 2` and the envelope constant `C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub r0: f64,
    pub mu: f64,
    /// `||a||_inf` on `[-1,1]_{mu/2}`.
    pub a_sup: f64,
    /// `||b + P(0) a||_inf` on `[-1,1]_{mu/2}`.
    pub forcing_sup: f64,
    pub tau_candidate: f64,
    pub nu_proxy: f64,
    /// Smallest grid-verified `C >= max(2 / nu, 1)` with
    /// `a_sup Pm(r0 + x) + forcing_sup <= C max(x, 1)^N0` on `x in [0, 2]`.
    pub c_est: f64,
}

/// `A` values tried when estimating the threshold of `psi`.
pub const TAU_CANDIDATES: [f64; 7] = [0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9];

impl Envelope {
    pub fn compute(p: &Problem, r0: f64, density: usize) -> Result<Envelope> {
        let mu = p.mu_or_estimate()?;
        let ek = check_ek(&p.psi, p.k, &TAU_CANDIDATES, 20, density.min(128))?;
        let tau_candidate = ek
            .tau_candidate
            .ok_or_else(|| Error::Diagnostic("psi fails the E(k) sampling check for every tested A".into()))?;
        let nu_proxy = mu.min(tau_candidate) / 2.0;

        let p0 = p.poly.constant_term();
        let a_sup = sup_on_stadium(mu / 2.0, density, |z| Ok(p.a.eval_complex(z)?.norm()))?;
        let forcing_sup = sup_on_stadium(mu / 2.0, density, |z| {
            Ok((p.b.eval_complex(z)? + p0 * p.a.eval_complex(z)?).norm())
        })?;

        let n0 = p.poly.degree() as i32;
        let mut c_est = (2.0 / nu_proxy).max(1.0);
        for i in 0..=ENVELOPE_GRID {
            let x = 2.0 * i as f64 / ENVELOPE_GRID as f64;
            let lhs = a_sup * p.poly.majorant_eval(r0 + x)? + forcing_sup;
            c_est = c_est.max(lhs / x.max(1.0).powi(n0));
        }
        Ok(Envelope {
            r0,
            mu,
            a_sup,
            forcing_sup,
            tau_candidate,
            nu_proxy,
            c_est,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaSequence {
    pub s: f64,
    pub values: Vec<f64>,
    pub c_est: f64,
    /// Every value is `<= c_est`.
    pub bounded: bool,
}

/// `omega_1 = 1`, `omega_{n+1} = a_sup Pm(r0 + s n^{-1/k} omega_n) + forcing_sup`.
pub fn omega_sequence(p: &Problem, env: &Envelope, s: f64, n_max: usize) -> Result<OmegaSequence> {
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!("s must be >= 0, got {s}")));
    }
    let mut values = Vec::with_capacity(n_max);
    if n_max > 0 {
        values.push(1.0);
    }
    for n in 1..n_max {
        let prev = values[n - 1];
        let x = env.r0 + s * (n as f64).powf(-1.0 / p.k) * prev;
        values.push(env.a_sup * p.poly.majorant_eval(x)? + env.forcing_sup);
    }
    let bounded = values.iter().all(|&w| w <= env.c_est);
    Ok(OmegaSequence {
        s,
        values,
        c_est: env.c_est,
        bounded,
    })
}

fn path_mass(a: &Expr, from: Complex64, to: Complex64) -> Result<f64> {
    let len = (to - from).norm();
    if len == 0.0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for i in 0..=PATH_PANELS {
        let tau = i as f64 / PATH_PANELS as f64;
        let w = if i == 0 || i == PATH_PANELS { 0.5 } else { 1.0 };
        total += w * a.eval_complex(from + (to - from) * tau)?.norm();
    }
    Ok(total * len / PATH_PANELS as f64)
}

/// Lambda(s). At `s = 0` the `|a|` mass uses the Chebyshev antiderivative;
/// for `s > 0` it is a sampled sup of trapezoid path integrals, a lower
/// approximation.
pub fn lambda_estimate(p: &Problem, s: f64, r0: f64, c: f64, density: usize) -> Result<f64> {
    if s == 0.0 {
        let a = p.a_fun()?;
        let mass = a.abs_integral(-1.0, p.d)?.max(a.abs_integral(p.d, 1.0)?);
        return Ok(mass * p.poly.majorant_deriv_eval(r0)?);
    }
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("s must be >= 0, got {s}")));
    }
    let mu = p.mu_or_estimate()?;
    if s >= mu {
        return Err(Error::InvalidArgument(format!("s = {s} must be below mu = {mu}")));
    }
    let d = Complex64::new(p.d, 0.0);
    let mass = sup_on_stadium(s, density, |z| path_mass(&p.a, d, z))?;
    Ok(mass * p.poly.majorant_deriv_eval(r0 + c * s)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEntry {
    pub n: usize,
    pub radius: f64,
    /// `max dist(f_n(z), [-r0, r0]) / (C s n^{-1/k})` over trusted points.
    pub worst_ratio: f64,
    pub worst_distance: f64,
    pub trusted_points: usize,
    pub untrusted_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub s_requested: f64,
    pub s_used: f64,
    pub c: f64,
    pub r0: f64,
    pub k: f64,
    pub entries: Vec<ProbeEntry>,
    /// All trusted ratios are `<= 1`.
    pub all_within: bool,
}

/// Evaluate the continuations of `f_n = iterates[n - 1]` on
/// `[-1,1]_{k,s,n}` and compare their distance to `[-r0, r0]` with
/// `C s n^{-1/k}`. `s` is halved until every sample lies inside the trusted
/// ellipse of its iterate.
pub fn stadium_inclusion_probe(
    iterates: &[ChebFun],
    k: f64,
    s: f64,
    c: f64,
    r0: f64,
    n_range: std::ops::RangeInclusive<usize>,
    density: usize,
) -> Result<ProbeReport> {
    if iterates.is_empty() {
        return Err(Error::Diagnostic("no iterates retained; solve with keep_iterates".into()));
    }
    if *n_range.start() < 1 || *n_range.end() > iterates.len() {
        return Err(Error::Diagnostic(format!(
            "probe range {}..={} needs iterates that were not retained ({} available)",
            n_range.start(),
            n_range.end(),
            iterates.len()
        )));
    }
    if !(s > 0.0 && c > 0.0 && k > 0.0) {
        return Err(Error::InvalidArgument("probe needs s, C, k > 0".into()));
    }
    let interior = 2 * density;
    let all_trusted = |s: f64| {
        n_range.clone().all(|n| {
            let radius = s * (n as f64).powf(-1.0 / k);
            let f = &iterates[n - 1];
            stadium_samples(radius, density, interior)
                .into_iter()
                .all(|z| f.eval_complex(z).1)
        })
    };
    let mut s_used = s;
    let mut halvings = 0;
    while !all_trusted(s_used) {
        s_used *= 0.5;
        halvings += 1;
        if halvings > 60 {
            return Err(Error::Diagnostic(
                "stadium could not be shrunk into the trusted ellipse of every iterate".into(),
            ));
        }
    }

    let mut entries = Vec::new();
    for n in n_range {
        let radius = s_used * (n as f64).powf(-1.0 / k);
        let scale = c * radius;
        let f = &iterates[n - 1];
        let mut entry = ProbeEntry {
            n,
            radius,
            worst_ratio: 0.0,
            worst_distance: 0.0,
            trusted_points: 0,
            untrusted_points: 0,
        };
        for z in stadium_samples(radius, density, interior) {
            let (value, trusted) = f.eval_complex(z);
            if !trusted {
                entry.untrusted_points += 1;
                continue;
            }
            entry.trusted_points += 1;
            let dist = dist_to_segment(value, r0).0;
            entry.worst_distance = entry.worst_distance.max(dist);
            entry.worst_ratio = entry.worst_ratio.max(dist / scale);
        }
        entries.push(entry);
    }
    let all_within = entries.iter().all(|e| e.worst_ratio <= 1.0);
    Ok(ProbeReport {
        s_requested: s,
        s_used,
        c,
        r0,
        k,
        entries,
        all_within,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeNorm {
    pub order: usize,
    pub sup: f64,
    /// Estimated error of `sup` from differentiating the truncated series.
    pub error_estimate: f64,
    /// Error estimate exceeds `1e-4 * sup`; excluded from fits.
    pub flagged: bool,
}

/// Sup norms of `u^{(j)}` for `j = 1..=n_max` (`n_max <= 12`).
///
/// Coefficient perturbations of size `noise = max(|c_m|, eps max|c|)` are
/// amplified by `j` differentiations at most by `T_m^{(j)}(1)` at the
/// endpoints and roughly by `(m / sqrt(1 - x^2))^j` inside. The error
/// estimate is the largest change of the sup norm under a perturbation with
/// that pointwise envelope.
pub fn derivative_norms(u: &ChebFun, n_max: usize) -> Result<Vec<DerivativeNorm>> {
    if n_max > MAX_DERIVATIVES {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_DERIVATIVES} derivatives, requested {n_max}"
        )));
    }
    let m = u.degree() as f64;
    let noise = u.coeffs()[u.degree()].abs().max(f64::EPSILON * u.max_abs_coeff());
    let grid_n = (8 * (u.degree() + 1)).max(64);
    let xs = chebyshev_points(grid_n);
    let mut out = Vec::with_capacity(n_max);
    let mut current = u.clone();
    // T_m^{(j)}(1) = prod_{i<j} (m^2 - i^2) / (2i + 1)
    let mut endpoint_growth = 1.0;
    for j in 1..=n_max {
        let i = (j - 1) as f64;
        endpoint_growth *= ((m * m - i * i) / (2.0 * i + 1.0)).max(0.0);
        current = current.differentiate();
        let sup = current.sup_norm();
        let envelope = |x: f64| {
            let s = (1.0 - x * x).max(0.0).sqrt();
            let interior = if s > 0.0 { (m / s).powi(j as i32) } else { f64::INFINITY };
            j as f64 * noise * endpoint_growth.min(interior)
        };
        let values = current.values_on_grid(grid_n);
        let (mut raise, mut at_max, mut best) = (0.0f64, 0.0, -1.0);
        for (&x, &v) in xs.iter().zip(&values) {
            let e = envelope(x);
            raise = raise.max(v.abs() + e - sup);
            if v.abs() > best {
                best = v.abs();
                at_max = e;
            }
        }
        let error_estimate = raise.max(at_max);
        out.push(DerivativeNorm {
            order: j,
            sup,
            error_estimate,
            flagged: error_estimate > CONDITIONING_RATIO * sup,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    /// Growth at most factorial: consistent with every Gevrey class.
    AnalyticLike,
    Gevrey { k_hat: f64 },
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GevreyEstimate {
    pub norms: Vec<f64>,
    pub orders_used: Vec<usize>,
    /// Coefficient `e` of `j log j` in the fit `log m_j = c0 + c1 j + e j log j`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// `c1`, the fitted `log B` per derivative order.
    pub log_b: Option<f64>,
    /// Smallest `B` with `m_j <= B^{j+1} j^{e j}` on the orders used.
    pub b_envelope: Option<f64>,
    pub k_hat: Option<f64>,
    pub classification: Classification,
}

/// Fit derivative growth over usable orders `j >= 2`.
pub fn gevrey_order_estimate(norms: &[DerivativeNorm]) -> GevreyEstimate {
    let usable: Vec<(usize, f64)> = norms
        .iter()
        .filter(|n| n.order >= 2 && !n.flagged && n.sup > 0.0 && n.sup.is_finite())
        .map(|n| (n.order, n.sup))
        .collect();
    fit_growth(norms.iter().map(|n| n.sup).collect(), usable)
}

/// Same fit for a plain sequence `m_1, m_2, ...` (index `i` is order `i + 1`).
pub fn gevrey_order_from_values(values: &[f64]) -> GevreyEstimate {
    let usable = values
        .iter()
        .enumerate()
        .map(|(i, &m)| (i + 1, m))
        .filter(|&(j, m)| j >= 2 && m > 0.0 && m.is_finite())
        .collect();
    fit_growth(values.to_vec(), usable)
}

fn fit_growth(all: Vec<f64>, usable: Vec<(usize, f64)>) -> GevreyEstimate {
    let unresolved = |all: Vec<f64>, used: Vec<usize>| GevreyEstimate {
        norms: all,
        orders_used: used,
        slope: None,
        intercept: None,
        log_b: None,
        b_envelope: None,
        k_hat: None,
        classification: Classification::Unresolved,
    };
    let orders: Vec<usize> = usable.iter().map(|&(j, _)| j).collect();
    if usable.len() < 4 {
        return unresolved(all, orders);
    }
    let rows: Vec<([f64; 3], f64)> = usable
        .iter()
        .map(|&(j, m)| {
            let jf = j as f64;
            ([1.0, jf, jf * jf.ln()], m.ln())
        })
        .collect();
    let Some([c0, c1, e]) = least_squares3(&rows) else {
        return unresolved(all, orders);
    };
    let b_envelope = usable
        .iter()
        .map(|&(j, m)| {
            let jf = j as f64;
            (m.ln() - e * jf * jf.ln()) / (jf + 1.0)
        })
        .fold(f64::NEG_INFINITY, f64::max)
        .exp();
    let (k_hat, classification) = if e > ANALYTIC_SLOPE {
        let k = 1.0 / (e - 1.0);
        (Some(k), Classification::Gevrey { k_hat: k })
    } else {
        (None, Classification::AnalyticLike)
    };
    GevreyEstimate {
        norms: all,
        orders_used: orders,
        slope: Some(e),
        intercept: Some(c0),
        log_b: Some(c1),
        b_envelope: Some(b_envelope),
        k_hat,
        classification,
    }
}

/// Least squares for three unknowns through the normal equations with
/// column scaling.
fn least_squares3(rows: &[([f64; 3], f64)]) -> Option<[f64; 3]> {
    let mut scale = [0.0f64; 3];
    for (x, _) in rows {
        for i in 0..3 {
            scale[i] = scale[i].max(x[i].abs());
        }
    }
    if scale.contains(&0.0) {
        return None;
    }
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (x, y) in rows {
        let xs = [x[0] / scale[0], x[1] / scale[1], x[2] / scale[2]];
        for i in 0..3 {
            atb[i] += xs[i] * y;
            for j in 0..3 {
                ata[i][j] += xs[i] * xs[j];
            }
        }
    }
    let sol = solve3(ata, atb)?;
    Some([sol[0] / scale[0], sol[1] / scale[1], sol[2] / scale[2]])
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (x, p) in m[row].iter_mut().zip(pivot_row).skip(col) {
                *x -= f * p;
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let tail: f64 = (i + 1..3).map(|j| m[i][j] * x[j]).sum();
        x[i] = (v[i] - tail) / m[i][i];
    }
    Some(x)
}
