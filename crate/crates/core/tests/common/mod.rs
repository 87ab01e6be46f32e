//! Randomized invariant checks shared by the property suite and the
//! acceptance run.

#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use gevrey_fde::chebfun::ChebFun;
use gevrey_fde::conditions::analyze;
use gevrey_fde::gevrey::{dist_to_interval, StadiumRegion};
use gevrey_fde::Problem;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type CaseResult = Result<(), TestCaseError>;

/// Chebyshev coefficients with geometric decay `rho^{-n}`.
pub fn decaying_coeffs() -> impl Strategy<Value = Vec<f64>> {
    (1usize..48, 1.3f64..4.0).prop_flat_map(|(len, rho)| {
        proptest::collection::vec(-1.0f64..1.0, len)
            .prop_map(move |v| v.iter().enumerate().map(|(n, c)| c * rho.powi(-(n as i32))).collect())
    })
}

fn scale(u: &ChebFun) -> f64 {
    u.max_abs_coeff().max(1e-300)
}

/// `(U)' = u`, `U(x) - U(d) = int_d^x u`, linearity and norm ordering.
pub fn chebfun_invariants(c1: Vec<f64>, c2: Vec<f64>, alpha: f64, beta: f64, x: f64, d: f64) -> CaseResult {
    let u = ChebFun::from_coeffs(c1, 1e-13);
    let v = ChebFun::from_coeffs(c2, 1e-13);
    let s = scale(&u);

    let anti = u.antiderivative();
    let back = anti.differentiate();
    prop_assert!(back.sub(&u).sup_norm() <= 1e-12 * s * (u.degree() as f64 + 1.0));
    prop_assert!(anti.eval(-1.0).unwrap().abs() <= 1e-14 * s);
    let via_anti = anti.eval(x).unwrap() - anti.eval(d).unwrap();
    prop_assert!((u.integral_from(d, x).unwrap() - via_anti).abs() <= 1e-13 * s);

    let w = u.combine(alpha, &v, beta);
    let expected = alpha * u.eval(x).unwrap() + beta * v.eval(x).unwrap();
    let mag = alpha.abs() * s + beta.abs() * scale(&v);
    prop_assert!((w.eval(x).unwrap() - expected).abs() <= 1e-13 * mag * (w.degree() as f64 + 1.0));

    let sup = u.sup_norm();
    prop_assert!(u.eval(x).unwrap().abs() <= sup * (1.0 + 1e-12) + 1e-300);
    let l1 = u.l1_norm().unwrap();
    prop_assert!(l1 <= 2.0 * sup * (1.0 + 1e-10) + 1e-14 * s);
    let signed = anti.eval(1.0).unwrap();
    prop_assert!(signed.abs() <= l1 * (1.0 + 1e-10) + 1e-13 * s);
    Ok(())
}

/// A problem whose forcing is `g e^t` and whose conditions hold by
/// construction: `||b + P(0) a||_1 + |c| = lambda * gap`.
pub fn condition_instance(
    alpha: f64,
    freq: f64,
    poly: Vec<f64>,
    lambda: f64,
    split: f64,
) -> Result<Option<Problem>, TestCaseError> {
    let a = format!("{alpha:?}*(1+0.5*sin({freq:?}*t))");
    let p0 = poly[0];
    let zero_forcing = format!("-({p0:?})*({a})");
    let base = Problem::from_strs(&a, &zero_forcing, "sin(t)", poly.clone(), 1.0, 0.0, 0.0)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let report = analyze(&base).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let Some(gap) = report.gap else {
        return Ok(None);
    };
    if !(gap > 0.0) {
        return Ok(None);
    }
    let e_l1 = std::f64::consts::E - (-1.0f64).exp();
    let g = lambda * gap * split / e_l1;
    let c = lambda * gap * (1.0 - split);
    let b = format!("{g:?}*exp(t) - ({p0:?})*({a})");
    let p = Problem::from_strs(&a, &b, "sin(t)", poly, 1.0, 0.0, c).map_err(|e| TestCaseError::fail(e.to_string()))?;
    Ok(Some(p))
}

pub fn poly_strategy() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=4, -1.0f64..1.0, -0.15f64..0.15, proptest::collection::vec(-1.0f64..1.0, 3)).prop_map(
        |(deg, p0, p1, rest)| {
            let mut c = vec![p0, p1];
            c.extend_from_slice(&rest[..deg - 1]);
            let lead = c[deg];
            c[deg] = if lead.abs() < 0.1 { 0.1f64.copysign(lead) } else { lead };
            c
        },
    )
}

/// `0 < r0 < theta < r1`, `q < 1`, sign-change certificates, `H(r0) = 0`.
pub fn conditions_invariants(alpha: f64, freq: f64, poly: Vec<f64>, lambda: f64, split: f64) -> CaseResult {
    let Some(p) = condition_instance(alpha, freq, poly, lambda, split)? else {
        return Err(TestCaseError::reject("theta undefined"));
    };
    let r = analyze(&p).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(r.passed(), "conditions should hold by construction: {:?}", r);
    let (theta, r0, r1, q) = (r.theta.unwrap(), r.r0.unwrap(), r.r1.unwrap(), r.q.unwrap());
    prop_assert!(0.0 < r0 && r0 < theta && theta < r1, "r0 {r0} theta {theta} r1 {r1}");
    prop_assert!((0.0..1.0).contains(&q));
    let (b0, b1) = (r.r0_bracket.unwrap(), r.r1_bracket.unwrap());
    prop_assert!(b0.changes_sign() && b1.changes_sign());
    prop_assert!(b0.lo <= r0 && r0 <= b0.hi && b1.lo <= r1 && r1 <= b1.hi);
    let h = |x: f64| r.a_l1 * p.poly.majorant_eval(x).unwrap() + r.cond2_lhs - x;
    prop_assert!(h(r0).abs() <= 1e-12 * (1.0 + r0));
    let q_direct = r.a_l1 * p.poly.majorant_deriv_eval(r0).unwrap();
    prop_assert!((q - q_direct).abs() <= 1e-14 * (1.0 + q));
    Ok(())
}

/// Membership at level `n + 1` implies membership at level `n`.
pub fn region_nesting(re: f64, im: f64, k: f64, a: f64, n: u64) -> CaseResult {
    let z = Complex64::new(re, im);
    let inner = StadiumRegion::new(k, a, n + 1).unwrap();
    let outer = StadiumRegion::new(k, a, n).unwrap();
    prop_assert!(inner.radius() <= outer.radius());
    if inner.contains(z) {
        prop_assert!(outer.contains(z));
    }
    Ok(())
}

pub fn dist_lipschitz(z1: (f64, f64), z2: (f64, f64)) -> CaseResult {
    let (a, b) = (Complex64::new(z1.0, z1.1), Complex64::new(z2.0, z2.1));
    let (ra, rb) = (dist_to_interval(a).0, dist_to_interval(b).0);
    prop_assert!((ra - rb).abs() <= (a - b).norm() * (1.0 + 1e-15) + 1e-15);
    Ok(())
}
