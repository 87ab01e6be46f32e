//! Adaptive Chebyshev series on [-1, 1].
//!
//! A [`ChebFun`] stores Chebyshev-T coefficients `c_0..c_m` of a smooth
//! function. Construction samples at Chebyshev extreme points on grids of
//! doubling size until the tail coefficients drop below the requested
//! relative tolerance, then trims the series. Evaluation uses the Clenshaw
//! recurrence in real or complex arithmetic; calculus uses the coefficient
//! recurrences for integration and differentiation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-13;
pub const DEFAULT_MAX_DEGREE: usize = 32768;

const MIN_GRID: usize = 16;
const DOMAIN_SLACK: f64 = 1e-14;
const ROOT_WIDTH: f64 = 1e-14;
/// Multiple of `eps * |terms|` below which a summed sample is roundoff.
const SUM_NOISE_FLOOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ChebFun {
    coeffs: Vec<f64>,
    build_tol: f64,
    /// Bernstein ellipse parameter inside which complex evaluation is
    /// trusted. Infinite for exact low-degree polynomials.
    ellipse: f64,
}

/// The `n + 1` Chebyshev extreme points `cos(j pi / n)`, in decreasing order.
pub fn chebyshev_points(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0];
    }
    // sin form keeps the grid exactly symmetric with an exact zero
    (0..=n)
        .map(|j| (PI * (n as f64 - 2.0 * j as f64) / (2.0 * n as f64)).sin())
        .collect()
}

/// Coefficients of the interpolant through values at `chebyshev_points(n)`.
fn values_to_coeffs(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    if n == 0 {
        return vec![values[0]];
    }
    let mut buf: Vec<Complex64> = Vec::with_capacity(2 * n);
    buf.extend(values.iter().map(|&v| Complex64::new(v, 0.0)));
    buf.extend(values[1..n].iter().rev().map(|&v| Complex64::new(v, 0.0)));
    FftPlanner::new().plan_fft_forward(2 * n).process(&mut buf);
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let w = buf[k].re / nf;
            if k == 0 || k == n {
                0.5 * w
            } else {
                w
            }
        })
        .collect()
}

/// Values at `chebyshev_points(n)` of the series `coeffs` (zero padded or
/// aliased to length `n + 1`).
fn coeffs_to_values(coeffs: &[f64], n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![coeffs.iter().sum()];
    }
    // fold coefficients beyond n back onto the grid (aliasing of T_k)
    let mut c = vec![0.0; n + 1];
    for (k, &ck) in coeffs.iter().enumerate() {
        let r = k % (2 * n);
        let idx = if r <= n { r } else { 2 * n - r };
        c[idx] += ck;
    }
    let mut buf: Vec<Complex64> = Vec::with_capacity(2 * n);
    buf.push(Complex64::new(c[0], 0.0));
    buf.extend(c[1..n].iter().map(|&v| Complex64::new(0.5 * v, 0.0)));
    buf.push(Complex64::new(c[n], 0.0));
    buf.extend(c[1..n].iter().rev().map(|&v| Complex64::new(0.5 * v, 0.0)));
    FftPlanner::new().plan_fft_forward(2 * n).process(&mut buf);
    buf[..=n].iter().map(|z| z.re).collect()
}

trait Scalar:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn from_f64(v: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
}

fn clenshaw<T: Scalar>(coeffs: &[f64], x: T) -> T {
    let mut b1 = T::zero();
    let mut b2 = T::zero();
    let two_x = x * 2.0;
    for &c in coeffs[1..].iter().rev() {
        let b0 = two_x * b1 - b2 + T::from_f64(c);
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + T::from_f64(coeffs[0])
}

/// Bernstein parameter of `z`: the `rho >= 1` whose ellipse passes through `z`.
pub fn bernstein_parameter(z: Complex64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let w = z + (z - one).sqrt() * (z + one).sqrt();
    let r = w.norm();
    if r >= 1.0 {
        r
    } else {
        1.0 / r
    }
}

/// Largest stadium radius `[-1,1] + B(0, r)` contained in the Bernstein
/// ellipse of parameter `rho`.
pub fn stadium_width(rho: f64) -> f64 {
    if rho.is_infinite() {
        f64::INFINITY
    } else {
        ((rho + 1.0 / rho) / 2.0 - 1.0).max(0.0)
    }
}

/// Ellipse estimate from coefficient decay between the middle and the end
/// of the series.
fn estimate_ellipse(coeffs: &[f64]) -> f64 {
    let m = coeffs.len() - 1;
    if m < 4 {
        return f64::INFINITY;
    }
    let half = m / 2;
    let mid = coeffs[half].abs().max(coeffs[half - 1].abs());
    let last = coeffs[m].abs().max(coeffs[m - 1].abs());
    if last == 0.0 {
        return f64::INFINITY;
    }
    if mid == 0.0 {
        return 1.0;
    }
    (mid / last).powf(1.0 / (m - half) as f64).max(1.0)
}

impl ChebFun {
    /// Adaptive construction from a fallible sampler.
    pub fn build<F>(mut f: F, tol: f64, max_degree: usize) -> Result<ChebFun>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        Self::build_summed(|x| f(x).map(|v| (v, 0.0)), tol, max_degree)
    }

    /// Adaptive construction of a sum of terms. The sampler returns the
    /// value and the sum of the absolute values of its terms. Coefficients
    /// below the roundoff floor of that magnitude count as resolved, so sums
    /// that cancel down to roundoff still terminate.
    pub fn build_summed<F>(mut f: F, tol: f64, max_degree: usize) -> Result<ChebFun>
    where
        F: FnMut(f64) -> Result<(f64, f64)>,
    {
        if !(1e-15..=1e-3).contains(&tol) {
            return Err(Error::InvalidArgument(format!(
                "build tolerance {tol:e} outside [1e-15, 1e-3]"
            )));
        }
        let magnitude = std::cell::Cell::new(0.0f64);
        let mut sample = |x: f64| -> Result<f64> {
            let (v, m) = f(x)?;
            if v.is_finite() && m.is_finite() {
                magnitude.set(magnitude.get().max(m));
                Ok(v)
            } else {
                Err(Error::NonFiniteSample { at: x, value: v })
            }
        };

        let mut n = MIN_GRID;
        let mut values: Vec<f64> = chebyshev_points(n)
            .into_iter()
            .map(&mut sample)
            .collect::<Result<_>>()?;
        loop {
            let coeffs = values_to_coeffs(&values);
            let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let cutoff = (tol * scale).max(SUM_NOISE_FLOOR * f64::EPSILON * magnitude.get());
            let tail = coeffs[n].abs().max(coeffs[n - 1].abs());
            if scale == 0.0 || tail <= cutoff {
                return Ok(Self::trimmed(coeffs, tol, cutoff / tol));
            }
            if n >= max_degree {
                return Err(Error::Unresolved {
                    max_degree,
                    tail: tail / scale,
                });
            }
            // the old grid is every other point of the doubled grid
            let finer = chebyshev_points(2 * n);
            let mut next = Vec::with_capacity(2 * n + 1);
            for (j, &x) in finer.iter().enumerate() {
                if j % 2 == 0 {
                    next.push(values[j / 2]);
                } else {
                    next.push(sample(x)?);
                }
            }
            values = next;
            n *= 2;
        }
    }

    /// Construction from an infallible closure with the default degree cap.
    pub fn from_fn(f: impl Fn(f64) -> f64, tol: f64) -> Result<ChebFun> {
        Self::build(|x| Ok(f(x)), tol, DEFAULT_MAX_DEGREE)
    }

    fn trimmed(mut coeffs: Vec<f64>, tol: f64, scale: f64) -> ChebFun {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1].abs() < tol * scale {
            coeffs.pop();
        }
        let ellipse = estimate_ellipse(&coeffs);
        ChebFun {
            coeffs,
            build_tol: tol,
            ellipse,
        }
    }

    /// Wrap raw coefficients. An empty slice means the zero function.
    pub fn from_coeffs(coeffs: Vec<f64>, build_tol: f64) -> ChebFun {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        let ellipse = estimate_ellipse(&coeffs);
        ChebFun {
            coeffs,
            build_tol,
            ellipse,
        }
    }

    pub fn constant(value: f64) -> ChebFun {
        ChebFun::from_coeffs(vec![value], DEFAULT_TOL)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn build_tol(&self) -> f64 {
        self.build_tol
    }

    pub fn ellipse(&self) -> f64 {
        self.ellipse
    }

    pub fn with_ellipse(mut self, rho: f64) -> ChebFun {
        self.ellipse = rho.max(1.0);
        self
    }

    /// Stadium radius around [-1, 1] inside the trusted ellipse.
    pub fn analyticity_width(&self) -> f64 {
        stadium_width(self.ellipse)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x.abs() <= 1.0 + DOMAIN_SLACK) {
            return Err(Error::OutsideDomain(x));
        }
        Ok(clenshaw(&self.coeffs, x.clamp(-1.0, 1.0)))
    }

    /// Clenshaw without the domain check; `x` must lie in [-1, 1].
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, x)
    }

    /// Complex evaluation of the series; `trusted` is false outside the
    /// estimated ellipse of analyticity.
    pub fn eval_complex(&self, z: Complex64) -> (Complex64, bool) {
        let value = clenshaw(&self.coeffs, z);
        let trusted = self.ellipse.is_infinite() || bernstein_parameter(z) < self.ellipse;
        (value, trusted)
    }

    /// Values at `chebyshev_points(n)`.
    pub fn values_on_grid(&self, n: usize) -> Vec<f64> {
        coeffs_to_values(&self.coeffs, n)
    }

    /// Indefinite integral normalised so that `U(-1) = 0`.
    pub fn antiderivative(&self) -> ChebFun {
        let c = &self.coeffs;
        let n = c.len();
        let at = |k: usize| c.get(k).copied().unwrap_or(0.0);
        let mut out = vec![0.0; n + 1];
        out[1] = at(0) - 0.5 * at(2);
        for (k, o) in out.iter_mut().enumerate().skip(2) {
            *o = (at(k - 1) - at(k + 1)) / (2.0 * k as f64);
        }
        let mut at_minus_one = 0.0;
        for (k, &ck) in out.iter().enumerate().skip(1) {
            at_minus_one += if k % 2 == 0 { ck } else { -ck };
        }
        out[0] = -at_minus_one;
        while out.len() > 1 && out[out.len() - 1] == 0.0 {
            out.pop();
        }
        ChebFun {
            coeffs: out,
            build_tol: self.build_tol,
            ellipse: self.ellipse,
        }
    }

    /// `U(x) - U(d)` for the antiderivative `U`.
    pub fn integral_from(&self, d: f64, x: f64) -> Result<f64> {
        let u = self.antiderivative();
        Ok(u.eval(x)? - u.eval(d)?)
    }

    pub fn differentiate(&self) -> ChebFun {
        let c = &self.coeffs;
        let n = c.len();
        if n == 1 {
            return ChebFun {
                coeffs: vec![0.0],
                build_tol: self.build_tol,
                ellipse: self.ellipse,
            };
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        ChebFun {
            coeffs: d,
            build_tol: self.build_tol,
            ellipse: self.ellipse,
        }
    }

    /// `alpha * self + beta * other`, coefficientwise.
    pub fn combine(&self, alpha: f64, other: &ChebFun, beta: f64) -> ChebFun {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| {
                alpha * self.coeffs.get(k).copied().unwrap_or(0.0)
                    + beta * other.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        ChebFun {
            coeffs,
            build_tol: self.build_tol.max(other.build_tol),
            ellipse: self.ellipse.min(other.ellipse),
        }
    }

    pub fn sub(&self, other: &ChebFun) -> ChebFun {
        self.combine(1.0, other, -1.0)
    }

    pub fn shifted(&self, delta: f64) -> ChebFun {
        let mut out = self.clone();
        out.coeffs[0] += delta;
        out
    }

    fn dense_grid_size(&self) -> usize {
        (8 * (self.degree() + 1)).max(64)
    }

    /// Maximum of `|u|` on [-1, 1]: dense Chebyshev grid, then golden-section
    /// refinement around the largest grid values.
    pub fn sup_norm(&self) -> f64 {
        if self.degree() == 0 {
            return self.coeffs[0].abs();
        }
        let n = self.dense_grid_size();
        let xs = chebyshev_points(n);
        let vs = self.values_on_grid(n);
        let mut best = vs.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vs[j].abs().total_cmp(&vs[i].abs()));
        for &j in order.iter().take(3) {
            // xs is decreasing
            let lo = xs[(j + 1).min(n)];
            let hi = xs[j.saturating_sub(1)];
            best = best.max(self.golden_max(lo, hi));
        }
        best
    }

    fn golden_max(&self, mut lo: f64, mut hi: f64) -> f64 {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let f = |x: f64| clenshaw(&self.coeffs, x).abs();
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let mut f1 = f(x1);
        let mut f2 = f(x2);
        let mut best = f(lo).max(f(hi));
        for _ in 0..200 {
            if hi - lo <= 1e-15 {
                break;
            }
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = f(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = f(x1);
            }
        }
        best = best.max(f1).max(f2);
        best
    }

    /// Roots of `u` in [-1, 1] located by sign changes on a dense grid and
    /// bisection, in increasing order.
    pub fn roots(&self) -> Result<Vec<f64>> {
        if self.degree() == 0 {
            return Ok(Vec::new());
        }
        let n = self.dense_grid_size();
        let mut xs = chebyshev_points(n);
        let mut vs = self.values_on_grid(n);
        xs.reverse();
        vs.reverse();
        let limit = 10 * (self.degree() + 1);
        let mut roots = Vec::new();
        for i in 0..n {
            let (a, b) = (xs[i], xs[i + 1]);
            let (fa, fb) = (vs[i], vs[i + 1]);
            if fa == 0.0 {
                roots.push(a);
            } else if fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
                roots.push(self.bisect(a, b, fa));
            }
            if roots.len() > limit {
                return Err(Error::TooManySignChanges {
                    found: roots.len(),
                    limit,
                });
            }
        }
        if vs[n] == 0.0 {
            roots.push(xs[n]);
        }
        Ok(roots)
    }

    fn bisect(&self, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
        while b - a > ROOT_WIDTH {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = clenshaw(&self.coeffs, m);
            if fm == 0.0 {
                return m;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    /// `int_lo^hi |u(t)| dt` for `-1 <= lo <= hi <= 1`, split at the roots of `u`.
    pub fn abs_integral(&self, lo: f64, hi: f64) -> Result<f64> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
        }
        let anti = self.antiderivative();
        let mut breaks = vec![lo];
        breaks.extend(self.roots()?.into_iter().filter(|&r| r > lo && r < hi));
        breaks.push(hi);
        let mut total = 0.0;
        for w in breaks.windows(2) {
            total += (anti.eval(w[1])? - anti.eval(w[0])?).abs();
        }
        Ok(total)
    }

    /// `int_{-1}^{1} |u(t)| dt`.
    pub fn l1_norm(&self) -> Result<f64> {
        self.abs_integral(-1.0, 1.0)
    }
}
