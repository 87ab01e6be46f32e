mod common;

use common::*;
use gevrey_fde::chebfun::ChebFun;
use gevrey_fde::expr::Expr;
use gevrey_fde::gevrey::{check_ek, gevrey_order_from_values};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn chebfun_calculus(
        c1 in decaying_coeffs(),
        c2 in decaying_coeffs(),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
        x in -1.0f64..=1.0,
        d in -1.0f64..=1.0,
    ) {
        chebfun_invariants(c1, c2, alpha, beta, x, d)?;
    }

    #[test]
    fn conditions_certificates(
        alpha in 0.1f64..2.0,
        freq in 0.5f64..3.0,
        poly in poly_strategy(),
        lambda in 0.05f64..0.95,
        split in 0.0f64..=1.0,
    ) {
        conditions_invariants(alpha, freq, poly, lambda, split)?;
    }

    #[test]
    fn stadium_nesting(
        re in -2.5f64..2.5,
        im in -1.5f64..1.5,
        k in 0.2f64..3.0,
        a in 0.01f64..2.0,
        n in 1u64..200,
    ) {
        region_nesting(re, im, k, a, n)?;
    }

    #[test]
    fn distance_is_lipschitz(
        z1 in (-3.0f64..3.0, -2.0f64..2.0),
        z2 in (-3.0f64..3.0, -2.0f64..2.0),
    ) {
        dist_lipschitz(z1, z2)?;
    }

    #[test]
    fn grid_values_rebuild(coeffs in decaying_coeffs()) {
        let u = ChebFun::from_coeffs(coeffs, 1e-13);
        let rebuilt = ChebFun::from_fn(|x| u.eval(x).unwrap(), 1e-14).unwrap();
        prop_assert!(rebuilt.sub(&u).sup_norm() <= 1e-12 * u.max_abs_coeff().max(1e-300));
    }

    #[test]
    fn printer_round_trip(a in -50.0f64..50.0, b in 0.1f64..5.0, f in 0usize..6) {
        let name = ["sin", "cos", "exp", "sinh", "cosh", "sqrt"][f];
        let src = format!("{a:?}*{name}({b:?}*t+2)^2 - t/{b:?}");
        let e = Expr::parse(&src).unwrap();
        let again = Expr::parse(&e.to_string()).unwrap();
        for t in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            let (x, y) = (e.eval_real(t).map(f64::to_bits), again.eval_real(t).map(f64::to_bits));
            prop_assert_eq!(x.is_ok(), y.is_ok());
            if let (Ok(x), Ok(y)) = (x, y) {
                prop_assert_eq!(x, y);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn identity_psi_has_every_ek(k in 0.2f64..3.0, a in 0.01f64..2.0, p_max in 1u64..15) {
        let psi = Expr::parse("t").unwrap();
        let report = check_ek(&psi, k, &[a], p_max, 16).unwrap();
        prop_assert!(report.pass);
    }

    #[test]
    fn gevrey_fit_recovers_k(k in prop::sample::select(vec![0.5, 1.0, 2.0])) {
        let e = 1.0 + 1.0 / k;
        let values: Vec<f64> = (1..=12).map(|j| (j as f64).powf(e * j as f64)).collect();
        let est = gevrey_order_from_values(&values);
        let k_hat = est.k_hat.unwrap();
        prop_assert!((k_hat - k).abs() <= 0.05 * k);
    }
}
