//! C ABI for the gevrey-fde solver.
//!
//! Problems and solutions are opaque handles created and freed by this
//! library. Every entry point returns an [`FdeStatus`]; on failure the
//! message is available from [`fde_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use gevrey_fde::cli::{exit_code, ProblemFile, RunReport};
use gevrey_fde::conditions::{analyze, ConditionsReport};
use gevrey_fde::gevrey::check_ek;
use gevrey_fde::picard::{solve, SolveOptions, Solution};
use gevrey_fde::{Error, Problem};

/// Status codes; 2, 3, 4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdeStatus {
    Ok = 0,
    HypothesisFailed = 2,
    ConvergenceFailed = 3,
    InvalidInput = 4,
    NullPointer = 5,
    Internal = 6,
}

/// Opaque problem handle.
pub struct FdeProblem {
    problem: Problem,
    file: ProblemFile,
}

/// Opaque solution handle.
pub struct FdeSolution {
    solution: Solution,
    d: f64,
}

/// Existence-condition summary; undefined quantities are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FdeConditions {
    pub a_l1: f64,
    pub forcing_l1: f64,
    pub cond1_lhs: f64,
    pub cond1_ok: bool,
    pub theta: f64,
    pub gap: f64,
    pub cond2_lhs: f64,
    pub cond2_ok: bool,
    pub r0: f64,
    pub r1: f64,
    pub q: f64,
    pub passed: bool,
}

/// Solver options; zero or negative fields keep the problem's settings.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FdeSolveOptions {
    pub force: bool,
    pub tol: f64,
    pub max_iter: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FdeSolutionInfo {
    pub iterations: u32,
    pub converged: bool,
    pub out_of_theorem: bool,
    pub residual_sup: f64,
    pub q_used: f64,
    pub r0_used: f64,
    pub degree: u32,
    pub u_at_d: f64,
    pub sup_norm: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> FdeStatus {
    set_error(e.to_string());
    match exit_code(e) {
        2 => FdeStatus::HypothesisFailed,
        3 => FdeStatus::ConvergenceFailed,
        _ => FdeStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> FdeStatus) -> FdeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == FdeStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => {
            set_error("internal panic");
            FdeStatus::Internal
        }
    }
}

fn null() -> FdeStatus {
    set_error("null pointer argument");
    FdeStatus::NullPointer
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, FdeStatus> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        FdeStatus::InvalidInput
    })
}

fn load(file: ProblemFile, out: *mut *mut FdeProblem) -> FdeStatus {
    let problem = match file.to_problem() {
        Ok(p) => p,
        Err(e) => return status_of(&e),
    };
    let validation = problem.validate();
    if !validation.passed() {
        let why: Vec<_> = validation.failures().map(|c| c.detail.clone()).collect();
        set_error(why.join("; "));
        return FdeStatus::InvalidInput;
    }
    let handle = Box::new(FdeProblem { problem, file });
    unsafe { *out = Box::into_raw(handle) };
    FdeStatus::Ok
}

/// Parse and validate a JSON problem document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fde_problem_from_json(json: *const c_char, out: *mut *mut FdeProblem) -> FdeStatus {
    guard(|| {
        if out.is_null() {
            return null();
        }
        *out = ptr::null_mut();
        let text = match str_arg(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ProblemFile::from_json(text) {
            Ok(file) => load(file, out),
            Err(e) => status_of(&e),
        }
    })
}

/// Read, parse and validate a JSON problem file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fde_problem_from_file(path: *const c_char, out: *mut *mut FdeProblem) -> FdeStatus {
    guard(|| {
        if out.is_null() {
            return null();
        }
        *out = ptr::null_mut();
        let path = match str_arg(path) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ProblemFile::from_path(Path::new(path)) {
            Ok(file) => load(file, out),
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `problem` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fde_problem_free(problem: *mut FdeProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

fn or_nan(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

fn summary(r: &ConditionsReport) -> FdeConditions {
    FdeConditions {
        a_l1: r.a_l1,
        forcing_l1: r.forcing_l1,
        cond1_lhs: r.cond1_lhs,
        cond1_ok: r.cond1_ok,
        theta: or_nan(r.theta),
        gap: or_nan(r.gap),
        cond2_lhs: r.cond2_lhs,
        cond2_ok: r.cond2_ok,
        r0: or_nan(r.r0),
        r1: or_nan(r.r1),
        q: or_nan(r.q),
        passed: r.passed(),
    }
}

/// Evaluate the existence conditions. Returns `HypothesisFailed` (with
/// `out` filled) when they do not hold.
///
/// # Safety
/// `problem` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fde_problem_check(problem: *const FdeProblem, out: *mut FdeConditions) -> FdeStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return null();
        }
        match analyze(&(*problem).problem) {
            Ok(r) => {
                *out = summary(&r);
                if r.passed() {
                    FdeStatus::Ok
                } else {
                    set_error(if r.notes.is_empty() {
                        "existence conditions not satisfied".to_string()
                    } else {
                        r.notes.join("; ")
                    });
                    FdeStatus::HypothesisFailed
                }
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Validation and conditions report as a JSON string, released with
/// [`fde_string_free`].
///
/// # Safety
/// `problem` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fde_problem_report_json(problem: *const FdeProblem, out: *mut *mut c_char) -> FdeStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return null();
        }
        *out = ptr::null_mut();
        let handle = &*problem;
        let mut report = RunReport::new(handle.file.clone(), handle.problem.validate());
        match analyze(&handle.problem) {
            Ok(r) => report.conditions = Some(r),
            Err(e) => return status_of(&e),
        }
        match CString::new(report.to_json()) {
            Ok(s) => {
                *out = s.into_raw();
                FdeStatus::Ok
            }
            Err(_) => {
                set_error("report contains NUL");
                FdeStatus::Internal
            }
        }
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fde_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solve by Picard iteration. `options` may be null. On
/// `ConvergenceFailed` after exhausting the iteration budget the last
/// iterate is still returned in `out`.
///
/// # Safety
/// `problem` and `out` must be valid pointers; `options` valid or null.
#[no_mangle]
pub unsafe extern "C" fn fde_problem_solve(
    problem: *const FdeProblem,
    options: *const FdeSolveOptions,
    out: *mut *mut FdeSolution,
) -> FdeStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return null();
        }
        *out = ptr::null_mut();
        let opts = if options.is_null() {
            FdeSolveOptions::default()
        } else {
            *options
        };
        let mut p = (*problem).problem.clone();
        if opts.tol > 0.0 {
            p.settings.solve_tol = opts.tol;
        }
        if opts.max_iter > 0 {
            p.settings.max_iter = opts.max_iter as usize;
        }
        let report = match analyze(&p) {
            Ok(r) => r,
            Err(e) => return status_of(&e),
        };
        let solve_opts = SolveOptions {
            force: opts.force,
            ..Default::default()
        };
        match solve(&p, &report, &solve_opts) {
            Ok(solution) => {
                let converged = solution.converged;
                if !converged {
                    set_error(solution.warnings.join("; "));
                }
                *out = Box::into_raw(Box::new(FdeSolution { solution, d: p.d }));
                if converged {
                    FdeStatus::Ok
                } else {
                    FdeStatus::ConvergenceFailed
                }
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `solution` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fde_solution_free(solution: *mut FdeSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Value of the solution at `x` in [-1, 1].
///
/// # Safety
/// `solution` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fde_solution_eval(solution: *const FdeSolution, x: f64, out: *mut f64) -> FdeStatus {
    guard(|| {
        if solution.is_null() || out.is_null() {
            return null();
        }
        match (*solution).solution.u.eval(x) {
            Ok(v) => {
                *out = v;
                FdeStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Values at `n` abscissae `xs` written to `out`.
///
/// # Safety
/// `xs` and `out` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn fde_solution_sample(
    solution: *const FdeSolution,
    xs: *const f64,
    n: usize,
    out: *mut f64,
) -> FdeStatus {
    guard(|| {
        if solution.is_null() || (n > 0 && (xs.is_null() || out.is_null())) {
            return null();
        }
        if n == 0 {
            return FdeStatus::Ok;
        }
        let u = &(*solution).solution.u;
        let xs = std::slice::from_raw_parts(xs, n);
        let out = std::slice::from_raw_parts_mut(out, n);
        for (x, slot) in xs.iter().zip(out.iter_mut()) {
            match u.eval(*x) {
                Ok(v) => *slot = v,
                Err(e) => return status_of(&e),
            }
        }
        FdeStatus::Ok
    })
}

/// # Safety
/// `solution` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fde_solution_info(solution: *const FdeSolution, out: *mut FdeSolutionInfo) -> FdeStatus {
    guard(|| {
        if solution.is_null() || out.is_null() {
            return null();
        }
        let h = &*solution;
        let s = h.solution.summary(h.d);
        *out = FdeSolutionInfo {
            iterations: s.iterations as u32,
            converged: s.converged,
            out_of_theorem: s.out_of_theorem,
            residual_sup: s.residual_sup,
            q_used: s.q_used,
            r0_used: s.r0_used,
            degree: s.degree as u32,
            u_at_d: s.u_at_d,
            sup_norm: s.sup_norm,
        };
        FdeStatus::Ok
    })
}

/// Chebyshev coefficients of the solution. Writes at most `cap` values
/// and stores the full count in `len`.
///
/// # Safety
/// `out` must hold `cap` doubles (or be null with `cap == 0`); `len` valid.
#[no_mangle]
pub unsafe extern "C" fn fde_solution_coeffs(
    solution: *const FdeSolution,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> FdeStatus {
    guard(|| {
        if solution.is_null() || len.is_null() || (cap > 0 && out.is_null()) {
            return null();
        }
        let c = (*solution).solution.u.coeffs();
        *len = c.len();
        let n = cap.min(c.len());
        if n > 0 {
            std::slice::from_raw_parts_mut(out, n).copy_from_slice(&c[..n]);
        }
        FdeStatus::Ok
    })
}

/// Sampled E(k) check of the problem's `psi` for the `n_a` scales in `a`
/// and levels `1..=p_max`. `pass` receives the verdict; the status is `Ok`
/// whenever the check ran.
///
/// # Safety
/// `a` must hold `n_a` doubles; `problem` and `pass` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fde_ek_check(
    problem: *const FdeProblem,
    a: *const f64,
    n_a: usize,
    p_max: u64,
    density: usize,
    pass: *mut bool,
) -> FdeStatus {
    guard(|| {
        if problem.is_null() || pass.is_null() || a.is_null() {
            return null();
        }
        let p = &(*problem).problem;
        let a = std::slice::from_raw_parts(a, n_a);
        match check_ek(&p.psi, p.k, a, p_max, density) {
            Ok(r) => {
                *pass = r.pass;
                FdeStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn fde_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fde_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
