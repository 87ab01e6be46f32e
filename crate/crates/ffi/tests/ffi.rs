use std::ffi::{CStr, CString};
use std::ptr;

use gevrey_fde_ffi::*;

const EXAMPLE2: &str = include_str!("../../core/problems/example2.json");
const ODE_ORACLE: &str = include_str!("../../core/problems/ode_oracle.json");

fn last_error() -> String {
    unsafe { CStr::from_ptr(fde_last_error()) }.to_string_lossy().into_owned()
}

fn problem(json: &str) -> *mut FdeProblem {
    let text = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    let status = unsafe { fde_problem_from_json(text.as_ptr(), &mut p) };
    assert_eq!(status, FdeStatus::Ok, "{}", last_error());
    assert!(!p.is_null());
    p
}

#[test]
fn check_and_solve_example2() {
    let p = problem(EXAMPLE2);
    let mut c = std::mem::MaybeUninit::<FdeConditions>::uninit();
    assert_eq!(unsafe { fde_problem_check(p, c.as_mut_ptr()) }, FdeStatus::Ok);
    let c = unsafe { c.assume_init() };
    assert!(c.passed && c.cond1_ok && c.cond2_ok);
    assert!((c.cond2_lhs - 0.02).abs() <= 1e-10);
    assert!(0.0 < c.r0 && c.r0 < c.theta && c.theta < c.r1 && c.q < 1.0);

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fde_problem_solve(p, ptr::null(), &mut s) }, FdeStatus::Ok);
    let mut u0 = f64::NAN;
    assert_eq!(unsafe { fde_solution_eval(s, 0.0, &mut u0) }, FdeStatus::Ok);
    assert!((u0 - 0.01).abs() <= 1e-12);

    let xs = [-1.0, 0.0, 1.0];
    let mut ys = [0.0; 3];
    assert_eq!(unsafe { fde_solution_sample(s, xs.as_ptr(), 3, ys.as_mut_ptr()) }, FdeStatus::Ok);
    assert_eq!(ys[1], u0);

    let mut info = std::mem::MaybeUninit::<FdeSolutionInfo>::uninit();
    assert_eq!(unsafe { fde_solution_info(s, info.as_mut_ptr()) }, FdeStatus::Ok);
    let info = unsafe { info.assume_init() };
    assert!(info.converged && !info.out_of_theorem && info.residual_sup <= 1e-10);

    let mut len = 0usize;
    assert_eq!(unsafe { fde_solution_coeffs(s, ptr::null_mut(), 0, &mut len) }, FdeStatus::Ok);
    assert_eq!(len, info.degree as usize + 1);
    let mut coeffs = vec![0.0; len];
    assert_eq!(unsafe { fde_solution_coeffs(s, coeffs.as_mut_ptr(), len, &mut len) }, FdeStatus::Ok);
    assert!(coeffs[0] != 0.0);

    let mut bad = 0.0;
    assert_eq!(unsafe { fde_solution_eval(s, 1.5, &mut bad) }, FdeStatus::InvalidInput);
    assert!(!last_error().is_empty());

    unsafe {
        fde_solution_free(s);
        fde_problem_free(p);
    }
}

#[test]
fn hypothesis_failure_and_force() {
    let p = problem(ODE_ORACLE);
    let mut c = std::mem::MaybeUninit::<FdeConditions>::uninit();
    assert_eq!(unsafe { fde_problem_check(p, c.as_mut_ptr()) }, FdeStatus::HypothesisFailed);
    let c = unsafe { c.assume_init() };
    assert!(!c.passed && c.r0.is_nan());

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fde_problem_solve(p, ptr::null(), &mut s) }, FdeStatus::HypothesisFailed);
    assert!(s.is_null());
    let opts = FdeSolveOptions {
        force: true,
        tol: 0.0,
        max_iter: 0,
    };
    assert_eq!(unsafe { fde_problem_solve(p, &opts, &mut s) }, FdeStatus::Ok);
    let mut info = std::mem::MaybeUninit::<FdeSolutionInfo>::uninit();
    unsafe { fde_solution_info(s, info.as_mut_ptr()) };
    assert!(unsafe { info.assume_init() }.out_of_theorem);
    unsafe {
        fde_solution_free(s);
        fde_problem_free(p);
    }
}

#[test]
fn non_convergence_returns_last_iterate() {
    let p = problem(EXAMPLE2);
    let opts = FdeSolveOptions {
        force: false,
        tol: 0.0,
        max_iter: 2,
    };
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fde_problem_solve(p, &opts, &mut s) }, FdeStatus::ConvergenceFailed);
    assert!(!s.is_null());
    assert!(last_error().contains("no convergence"));
    unsafe {
        fde_solution_free(s);
        fde_problem_free(p);
    }
}

#[test]
fn input_errors() {
    let mut p = ptr::null_mut();
    let bad_d = CString::new(r#"{"k":1,"d":3,"c":0,"P":[1],"a":"1","b":"0","psi":"t"}"#).unwrap();
    assert_eq!(unsafe { fde_problem_from_json(bad_d.as_ptr(), &mut p) }, FdeStatus::InvalidInput);
    assert!(p.is_null());
    assert!(last_error().contains("d outside"));

    let syntax = CString::new(r#"{"k":1,"d":0,"c":0,"P":[1],"a":"1+","b":"0","psi":"t"}"#).unwrap();
    assert_eq!(unsafe { fde_problem_from_json(syntax.as_ptr(), &mut p) }, FdeStatus::InvalidInput);

    let missing = CString::new("/nonexistent/file.json").unwrap();
    assert_eq!(unsafe { fde_problem_from_file(missing.as_ptr(), &mut p) }, FdeStatus::InvalidInput);

    assert_eq!(unsafe { fde_problem_from_json(ptr::null(), &mut p) }, FdeStatus::NullPointer);
    assert_eq!(unsafe { fde_problem_from_json(bad_d.as_ptr(), ptr::null_mut()) }, FdeStatus::NullPointer);
    assert_eq!(unsafe { fde_problem_check(ptr::null(), ptr::null_mut()) }, FdeStatus::NullPointer);
    unsafe {
        fde_problem_free(ptr::null_mut());
        fde_solution_free(ptr::null_mut());
        fde_string_free(ptr::null_mut());
    }
}

#[test]
fn from_file_and_report() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/problems/example1.json");
    let path = CString::new(path).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { fde_problem_from_file(path.as_ptr(), &mut p) }, FdeStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { fde_problem_report_json(p, &mut json) }, FdeStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { fde_string_free(json) };
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let theta = report["conditions"]["theta"].as_f64().unwrap();
    assert!((theta - (1.0f64 / 3.0).sqrt()).abs() <= 1e-12);
    unsafe { fde_problem_free(p) };
}

#[test]
fn ek_check_through_abi() {
    let p = problem(EXAMPLE2);
    let a = [0.1, 0.5, 0.9];
    let mut pass = false;
    assert_eq!(unsafe { fde_ek_check(p, a.as_ptr(), 3, 50, 64, &mut pass) }, FdeStatus::Ok);
    assert!(pass);
    let bad = [-1.0];
    assert_eq!(unsafe { fde_ek_check(p, bad.as_ptr(), 1, 5, 16, &mut pass) }, FdeStatus::InvalidInput);
    unsafe { fde_problem_free(p) };
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(fde_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
