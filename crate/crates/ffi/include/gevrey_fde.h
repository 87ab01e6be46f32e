#ifndef GEVREY_FDE_H
#define GEVREY_FDE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; 2, 3, 4 match the command-line exit codes.
 */
typedef enum FdeStatus {
  FDE_STATUS_OK = 0,
  FDE_STATUS_HYPOTHESIS_FAILED = 2,
  FDE_STATUS_CONVERGENCE_FAILED = 3,
  FDE_STATUS_INVALID_INPUT = 4,
  FDE_STATUS_NULL_POINTER = 5,
  FDE_STATUS_INTERNAL = 6,
} FdeStatus;

/**
 * Opaque problem handle.
 */
typedef struct FdeProblem FdeProblem;

/**
 * Opaque solution handle.
 */
typedef struct FdeSolution FdeSolution;

/**
 * Existence-condition summary; undefined quantities are NaN.
 */
typedef struct FdeConditions {
  double a_l1;
  double forcing_l1;
  double cond1_lhs;
  bool cond1_ok;
  double theta;
  double gap;
  double cond2_lhs;
  bool cond2_ok;
  double r0;
  double r1;
  double q;
  bool passed;
} FdeConditions;

/**
 * Solver options; zero or negative fields keep the problem's settings.
 */
typedef struct FdeSolveOptions {
  bool force;
  double tol;
  uint32_t max_iter;
} FdeSolveOptions;

typedef struct FdeSolutionInfo {
  uint32_t iterations;
  bool converged;
  bool out_of_theorem;
  double residual_sup;
  double q_used;
  double r0_used;
  uint32_t degree;
  double u_at_d;
  double sup_norm;
} FdeSolutionInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse and validate a JSON problem document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FdeStatus fde_problem_from_json(const char *json, struct FdeProblem **out);

/**
 * Read, parse and validate a JSON problem file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FdeStatus fde_problem_from_file(const char *path, struct FdeProblem **out);

/**
 * # Safety
 * `problem` must come from this library or be null.
 */
void fde_problem_free(struct FdeProblem *problem);

/**
 * Evaluate the existence conditions. Returns `HypothesisFailed` (with
 * `out` filled) when they do not hold.
 *
 * # Safety
 * `problem` and `out` must be valid pointers.
 */
enum FdeStatus fde_problem_check(const struct FdeProblem *problem, struct FdeConditions *out);

/**
 * Validation and conditions report as a JSON string, released with
 * [`fde_string_free`].
 *
 * # Safety
 * `problem` and `out` must be valid pointers.
 */
enum FdeStatus fde_problem_report_json(const struct FdeProblem *problem, char **out);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void fde_string_free(char *s);

/**
 * Solve by Picard iteration. `options` may be null. On
 * `ConvergenceFailed` after exhausting the iteration budget the last
 * iterate is still returned in `out`.
 *
 * # Safety
 * `problem` and `out` must be valid pointers; `options` valid or null.
 */
enum FdeStatus fde_problem_solve(const struct FdeProblem *problem,
                                 const struct FdeSolveOptions *options,
                                 struct FdeSolution **out);

/**
 * # Safety
 * `solution` must come from this library or be null.
 */
void fde_solution_free(struct FdeSolution *solution);

/**
 * Value of the solution at `x` in [-1, 1].
 *
 * # Safety
 * `solution` and `out` must be valid pointers.
 */
enum FdeStatus fde_solution_eval(const struct FdeSolution *solution, double x, double *out);

/**
 * Values at `n` abscissae `xs` written to `out`.
 *
 * # Safety
 * `xs` and `out` must each hold `n` doubles.
 */
enum FdeStatus fde_solution_sample(const struct FdeSolution *solution,
                                   const double *xs,
                                   size_t n,
                                   double *out);

/**
 * # Safety
 * `solution` and `out` must be valid pointers.
 */
enum FdeStatus fde_solution_info(const struct FdeSolution *solution, struct FdeSolutionInfo *out);

/**
 * Chebyshev coefficients of the solution. Writes at most `cap` values
 * and stores the full count in `len`.
 *
 * # Safety
 * `out` must hold `cap` doubles (or be null with `cap == 0`); `len` valid.
 */
enum FdeStatus fde_solution_coeffs(const struct FdeSolution *solution,
                                   double *out,
                                   size_t cap,
                                   size_t *len);

/**
 * Sampled E(k) check of the problem's `psi` for the `n_a` scales in `a`
 * and levels `1..=p_max`. `pass` receives the verdict; the status is `Ok`
 * whenever the check ran.
 *
 * # Safety
 * `a` must hold `n_a` doubles; `problem` and `pass` must be valid.
 */
enum FdeStatus fde_ek_check(const struct FdeProblem *problem,
                            const double *a,
                            size_t n_a,
                            uint64_t p_max,
                            size_t density,
                            bool *pass);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *fde_last_error(void);

/**
 * Library version, a static NUL-terminated string.
 */
const char *fde_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEVREY_FDE_H */
