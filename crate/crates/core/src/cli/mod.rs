//! Command-line front end.
//!
//! Exit codes: 0 success, 2 hypothesis failure, 3 convergence or
//! diagnostic failure, 4 input error.

pub mod input;
pub mod report;
pub mod reproduce;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::chebfun::ChebFun;
use crate::conditions::{analyze, ConditionsReport};
use crate::error::{Error, Result};
use crate::gevrey::{
    check_ek, derivative_norms, gevrey_order_estimate, gevrey_order_from_values, lambda_estimate, omega_sequence,
    stadium_inclusion_probe, Classification, Envelope, DEFAULT_DENSITY, TAU_CANDIDATES,
};
use crate::picard::{residual_at, solve, Solution, SolveOptions};
use crate::problem::Problem;

pub use input::ProblemFile;
pub use report::{Diagnostics, RunReport, Timing};
pub use reproduce::{reproduce, Which};

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

/// Number of iterates probed for stadium inclusion.
pub const PROBE_ITERATES: usize = 8;
/// Length of the reported omega sequence.
pub const OMEGA_TERMS: usize = 200;
/// Number of CSV intervals on [-1, 1].
pub const CSV_INTERVALS: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "gevrey-fde", version, about = "Solve y'(x) = a(x) P(y(psi(x))) + b(x), y(d) = c on [-1, 1]")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a problem and check the existence conditions.
    Check { path: PathBuf },
    /// Check, then solve by Picard iteration.
    Solve {
        path: PathBuf,
        /// Stopping tolerance on the distance to the fixed point.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// CSV output with columns x,u,residual.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Iterate even when the conditions fail.
        #[arg(long)]
        force: bool,
        /// Keep every iterate and run the envelope and inclusion diagnostics.
        #[arg(long)]
        keep_iterates: bool,
        /// Refuse to solve unless psi passes the sampled E(k) check.
        #[arg(long)]
        require_ek: bool,
        /// Add wall-clock timings to the report.
        #[arg(long)]
        timing: bool,
    },
    /// Sampled check of the E(k) self-map property of psi.
    Ek {
        path: PathBuf,
        /// Comma-separated fattening scales.
        #[arg(long = "A", value_delimiter = ',', default_value = "0.5")]
        a: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        pmax: u64,
        /// Boundary points per stadium piece.
        #[arg(long, default_value_t = DEFAULT_DENSITY)]
        density: usize,
    },
    /// Derivative growth of the solution and a Gevrey order estimate.
    Gevrey {
        #[arg(required_unless_present = "selftest")]
        path: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
        #[arg(long)]
        force: bool,
        /// Fit the constructed sequence m_j = j^(2j) and check k = 1.
        #[arg(long)]
        selftest: bool,
    },
    /// Rerun the built-in examples and check the reference values.
    Reproduce {
        #[arg(value_enum, default_value_t = Which::All)]
        which: Which,
    },
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::Eval(_)
        | Error::InvalidArgument(_)
        | Error::InvalidProblem(_)
        | Error::PsiOutOfRange { .. }
        | Error::OutsideDomain(_)
        | Error::NonFiniteSample { .. } => EXIT_INPUT,
        Error::ThetaUndefined(_) | Error::HypothesesFailed(_) => EXIT_HYPOTHESIS,
        Error::Unresolved { .. }
        | Error::TooManySignChanges { .. }
        | Error::BallEscape { .. }
        | Error::Bracket(_)
        | Error::Internal(_)
        | Error::Diagnostic(_) => EXIT_CONVERGENCE,
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_INPUT
                }
            };
        }
    };
    match cli.command {
        Command::Check { path } => cmd_check(&path, out, err),
        Command::Solve {
            path,
            tol,
            max_iter,
            out: csv,
            force,
            keep_iterates,
            require_ek,
            timing,
        } => cmd_solve(
            &path,
            &SolveArgs {
                tol,
                max_iter,
                csv,
                force,
                keep_iterates,
                require_ek,
                timing,
            },
            out,
            err,
        ),
        Command::Ek { path, a, pmax, density } => cmd_ek(&path, &a, pmax, density, out, err),
        Command::Gevrey {
            path,
            nmax,
            force,
            selftest,
        } => {
            if selftest {
                cmd_gevrey_selftest(out)
            } else {
                let path = path.expect("clap enforces path");
                cmd_gevrey(&path, nmax, force, out, err)
            }
        }
        Command::Reproduce { which } => {
            let outcome = reproduce(which);
            let _ = out.write_all(outcome.render().as_bytes());
            if outcome.passed() {
                EXIT_OK
            } else {
                EXIT_CONVERGENCE
            }
        }
    }
}

fn fail(err: &mut dyn Write, e: &Error) -> i32 {
    let _ = writeln!(err, "error: {e}");
    exit_code(e)
}

fn emit(out: &mut dyn Write, report: &RunReport) {
    let _ = out.write_all(report.to_json().as_bytes());
}

/// Load and validate; on failure prints the reasons and returns the exit code.
fn load_valid(path: &Path, err: &mut dyn Write) -> std::result::Result<(ProblemFile, Problem, RunReport), i32> {
    let loaded = ProblemFile::from_path(path).and_then(|f| f.to_problem().map(|p| (f, p)));
    let (file, problem) = loaded.map_err(|e| fail(err, &e))?;
    let validation = problem.validate();
    for w in &validation.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    if !validation.passed() {
        for c in validation.failures() {
            let _ = writeln!(err, "error: {}", c.detail);
        }
        return Err(EXIT_INPUT);
    }
    let report = RunReport::new(file.clone(), validation);
    Ok((file, problem, report))
}

pub fn cmd_check(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (_, problem, mut report) = match load_valid(path, err) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let conditions = match analyze(&problem) {
        Ok(c) => c,
        Err(e) => return fail(err, &e),
    };
    let passed = conditions.passed();
    for note in &conditions.notes {
        let _ = writeln!(err, "note: {note}");
    }
    report.conditions = Some(conditions);
    emit(out, &report);
    if passed {
        EXIT_OK
    } else {
        EXIT_HYPOTHESIS
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveArgs {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub csv: Option<PathBuf>,
    pub force: bool,
    pub keep_iterates: bool,
    pub require_ek: bool,
    pub timing: bool,
}

/// Sampled E(k) check used by `--require-ek`.
pub fn default_ek(p: &Problem) -> Result<crate::gevrey::EkReport> {
    check_ek(&p.psi, p.k, &TAU_CANDIDATES, 20, 128)
}

pub fn cmd_solve(path: &Path, args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (_, mut problem, _) = match load_valid(path, err) {
        Ok(v) => v,
        Err(code) => return code,
    };
    if let Some(tol) = args.tol {
        problem.settings.solve_tol = tol;
    }
    if let Some(n) = args.max_iter {
        problem.settings.max_iter = n;
    }
    let validation = problem.validate();
    if !validation.passed() {
        for c in validation.failures() {
            let _ = writeln!(err, "error: {}", c.detail);
        }
        return EXIT_INPUT;
    }
    let mut report = RunReport::new(ProblemFile::from(&problem), validation);
    let mut timing = Timing::default();
    let mut diagnostics = Diagnostics::default();

    let clock = Instant::now();
    let conditions = match analyze(&problem) {
        Ok(c) => c,
        Err(e) => return fail(err, &e),
    };
    timing.check_s = clock.elapsed().as_secs_f64();
    let passed = conditions.passed();
    report.conditions = Some(conditions.clone());

    if args.require_ek {
        match default_ek(&problem) {
            Ok(ek) => {
                let ok = ek.tau_candidate.is_some();
                diagnostics.ek = Some(ek);
                if !ok {
                    let _ = writeln!(err, "error: psi fails the sampled E(k) check for every tested A");
                    report.diagnostics = Some(diagnostics);
                    emit(out, &report);
                    return EXIT_HYPOTHESIS;
                }
            }
            Err(e) => return fail(err, &e),
        }
    }
    if !passed && !args.force {
        for note in &conditions.notes {
            let _ = writeln!(err, "note: {note}");
        }
        let _ = writeln!(err, "error: existence conditions not satisfied (use --force to iterate anyway)");
        emit(out, &report);
        return EXIT_HYPOTHESIS;
    }

    let opts = SolveOptions {
        force: args.force,
        keep_iterates: args.keep_iterates,
        start: None,
    };
    let clock = Instant::now();
    let solution = match solve(&problem, &conditions, &opts) {
        Ok(s) => s,
        Err(e) => {
            let code = fail(err, &e);
            emit(out, &report);
            return code;
        }
    };
    timing.solve_s = clock.elapsed().as_secs_f64();
    for w in &solution.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    report.solve = Some(solution.summary(problem.d));

    if let Some(csv) = &args.csv {
        if let Err(e) = write_csv(csv, &solution, &problem) {
            return fail(err, &e);
        }
    }

    let clock = Instant::now();
    if args.keep_iterates {
        solve_diagnostics(&problem, &conditions, &solution, &mut diagnostics);
        for e in &diagnostics.errors {
            let _ = writeln!(err, "warning: {e}");
        }
    }
    timing.diagnostics_s = clock.elapsed().as_secs_f64();
    if !diagnostics.is_empty() {
        report.diagnostics = Some(diagnostics);
    }
    if args.timing {
        report.timing = Some(timing);
    }
    emit(out, &report);
    if solution.converged {
        EXIT_OK
    } else {
        EXIT_CONVERGENCE
    }
}

/// `x,u,residual` rows at `x_i = -1 + 2 i / 1000`.
pub fn csv_rows(solution: &Solution, p: &Problem) -> Result<Vec<(f64, f64, f64)>> {
    let du = solution.u.differentiate();
    (0..=CSV_INTERVALS)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / CSV_INTERVALS as f64;
            Ok((x, solution.u.eval(x)?, residual_at(&solution.u, &du, p, x)?))
        })
        .collect()
}

fn write_csv(path: &Path, solution: &Solution, p: &Problem) -> Result<()> {
    let rows = csv_rows(solution, p)?;
    let mut text = String::from("x,u,residual\n");
    for (x, u, r) in rows {
        text.push_str(&format!("{x:?},{u:?},{r:?}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

/// Envelope, omega sequence, Lambda(0) and the stadium inclusion probe.
pub fn solve_diagnostics(p: &Problem, conditions: &ConditionsReport, sol: &Solution, diag: &mut Diagnostics) {
    let r0 = conditions.r0.unwrap_or(sol.r0_used);
    let env = match Envelope::compute(p, r0, DEFAULT_DENSITY) {
        Ok(env) => env,
        Err(e) => {
            diag.errors.push(format!("envelope: {e}"));
            return;
        }
    };
    let s = 1.0 / (2.0 * env.c_est);
    match omega_sequence(p, &env, s, OMEGA_TERMS) {
        Ok(o) => diag.omega = Some(o),
        Err(e) => diag.errors.push(format!("omega: {e}")),
    }
    match lambda_estimate(p, 0.0, r0, env.c_est, DEFAULT_DENSITY) {
        Ok(l) => diag.lambda0 = Some(l),
        Err(e) => diag.errors.push(format!("lambda: {e}")),
    }
    if !sol.iterates.is_empty() {
        let n_max = PROBE_ITERATES.min(sol.iterates.len());
        match stadium_inclusion_probe(&sol.iterates, p.k, s, env.c_est, r0, 1..=n_max, DEFAULT_DENSITY) {
            Ok(probe) => diag.probe = Some(probe),
            Err(e) => diag.errors.push(format!("probe: {e}")),
        }
    }
    diag.envelope = Some(env);
}

pub fn cmd_ek(path: &Path, a: &[f64], pmax: u64, density: usize, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let problem = match ProblemFile::from_path(path).and_then(|f| f.to_problem()) {
        Ok(p) => p,
        Err(e) => return fail(err, &e),
    };
    let report = match check_ek(&problem.psi, problem.k, a, pmax, density) {
        Ok(r) => r,
        Err(e) => return fail(err, &e),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    let _ = out.write_all(text.as_bytes());
    if report.pass {
        EXIT_OK
    } else {
        EXIT_HYPOTHESIS
    }
}

/// Derivative norms of the solution and the fitted growth.
pub fn gevrey_diagnostics(u: &ChebFun, n_max: usize, diag: &mut Diagnostics) -> Result<bool> {
    let norms = derivative_norms(u, n_max)?;
    let estimate = gevrey_order_estimate(&norms);
    let resolved = estimate.classification != Classification::Unresolved;
    diag.derivative_norms = Some(norms);
    diag.gevrey = Some(estimate);
    Ok(resolved)
}

pub fn cmd_gevrey(path: &Path, n_max: usize, force: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (_, problem, mut report) = match load_valid(path, err) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let conditions = match analyze(&problem) {
        Ok(c) => c,
        Err(e) => return fail(err, &e),
    };
    let opts = SolveOptions {
        force,
        ..Default::default()
    };
    report.conditions = Some(conditions.clone());
    let solution = match solve(&problem, &conditions, &opts) {
        Ok(s) => s,
        Err(e) => {
            let code = fail(err, &e);
            emit(out, &report);
            return code;
        }
    };
    report.solve = Some(solution.summary(problem.d));
    let mut diag = Diagnostics::default();
    let resolved = match gevrey_diagnostics(&solution.u, n_max, &mut diag) {
        Ok(r) => r,
        Err(e) => return fail(err, &e),
    };
    report.diagnostics = Some(diag);
    emit(out, &report);
    if !solution.converged {
        let _ = writeln!(err, "error: solve did not converge");
        EXIT_CONVERGENCE
    } else if !resolved {
        let _ = writeln!(err, "error: fewer than 4 usable derivative norms; growth unresolved");
        EXIT_CONVERGENCE
    } else {
        EXIT_OK
    }
}

/// Fit `m_j = j^(2j)`, `j = 1..12`, and require `k = 1 +/- 0.05`.
pub fn cmd_gevrey_selftest(out: &mut dyn Write) -> i32 {
    let values: Vec<f64> = (1..=12).map(|j| (j as f64).powf(2.0 * j as f64)).collect();
    let estimate = gevrey_order_from_values(&values);
    let mut text = serde_json::to_string_pretty(&estimate).expect("estimate serializes");
    text.push('\n');
    let _ = out.write_all(text.as_bytes());
    match estimate.k_hat {
        Some(k) if (k - 1.0).abs() <= 0.05 => EXIT_OK,
        _ => EXIT_CONVERGENCE,
    }
}
