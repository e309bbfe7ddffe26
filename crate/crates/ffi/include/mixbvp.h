#ifndef MIXBVP_H
#define MIXBVP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BvpStatus {
  BVP_STATUS_OK = 0,
  BVP_STATUS_NULL_POINTER = 1,
  BVP_STATUS_INVALID_ARGUMENT = 2,
  BVP_STATUS_UNKNOWN_PROBLEM = 3,
  BVP_STATUS_EVALUATION = 4,
  BVP_STATUS_DIVERGENCE = 5,
  BVP_STATUS_NOT_CONVERGED = 6,
  BVP_STATUS_DEGENERATE_ENDPOINT = 7,
  BVP_STATUS_NO_BOUND_FOUND = 8,
  BVP_STATUS_BUFFER_TOO_SMALL = 9,
  BVP_STATUS_INTERNAL = 10,
} BvpStatus;

typedef enum BvpVerdict {
  BVP_VERDICT_POSITIVE_CLOSED = 0,
  BVP_VERDICT_POSITIVE_HALF_OPEN = 1,
  BVP_VERDICT_NONNEGATIVE_ONLY = 2,
  BVP_VERDICT_FAILS = 3,
} BvpVerdict;

// A corpus problem on a fixed grid.
typedef struct BvpProblem BvpProblem;

// A solve result.
typedef struct BvpSolution BvpSolution;

typedef struct BvpSolveSummary {
  bool converged;
  size_t iterations;
  double residual;
  double boundary_defect;
  double fixed_point_gap;
  double sup_norm;
  double deriv_sup_norm;
  double min_value;
  double max_value;
} BvpSolveSummary;

typedef struct BvpPositivity {
  enum BvpVerdict verdict;
  bool meets_claim;
  double min_value;
  double min_location;
  double margin_interior;
} BvpPositivity;

// Degrees are meaningful only when the matching `has_*` flag is set.
typedef struct BvpDegreeSummary {
  int32_t deg_kernel;
  bool has_omega_r;
  int32_t deg_omega_r;
  bool has_omega_big_r;
  int32_t deg_omega_big_r;
  bool has_annulus;
  int32_t deg_annulus;
  bool theorem_applicable;
  double m_r;
  double m_big_r;
} BvpDegreeSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *mixbvp_last_error(void);

// Creates a corpus problem (`"logistic-bc1"`, `"mms-bc2"`, ...) on `[0, T]`
// with `n` subintervals. `bc` is 1, 2 or 3, or 0 to take it from the name.
//
// # Safety
// `name` must be a valid NUL-terminated string and `out` a valid pointer.
enum BvpStatus mixbvp_problem_new(const char *name,
                                  uint32_t bc,
                                  double length,
                                  size_t n,
                                  struct BvpProblem **out);

// # Safety
// `problem` must be null or a handle from [`mixbvp_problem_new`] not yet freed.
void mixbvp_problem_free(struct BvpProblem *problem);

// Sets the residual and boundary-defect tolerance.
//
// # Safety
// `problem` must be a live handle.
enum BvpStatus mixbvp_problem_set_tolerance(struct BvpProblem *problem, double tol);

// Solves from the default kernel-element guess. A solution handle is
// returned on `Ok` and on `NotConverged`.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum BvpStatus mixbvp_solve(const struct BvpProblem *problem, struct BvpSolution **out);

// # Safety
// `solution` must be null or a handle from [`mixbvp_solve`] not yet freed.
void mixbvp_solution_free(struct BvpSolution *solution);

// Number of grid nodes (`n + 1`), or 0 for a null handle.
//
// # Safety
// `solution` must be null or a live handle.
size_t mixbvp_solution_len(const struct BvpSolution *solution);

// Copies nodes, values and derivatives into caller buffers of length `len`.
// Any of `t`, `u`, `du` may be null to skip it.
//
// # Safety
// Non-null buffers must hold at least `len` doubles.
enum BvpStatus mixbvp_solution_copy(const struct BvpSolution *solution,
                                    double *t,
                                    double *u,
                                    double *du,
                                    size_t len);

// # Safety
// `solution` must be a live handle and `out` a valid pointer.
enum BvpStatus mixbvp_solution_summary(const struct BvpSolution *solution,
                                       struct BvpSolveSummary *out);

// Positivity certificate of the solution with tolerance `tol`.
//
// # Safety
// `solution` must be a live handle and `out` a valid pointer.
enum BvpStatus mixbvp_solution_positivity(const struct BvpSolution *solution,
                                          double tol,
                                          struct BvpPositivity *out);

// The kernel map `h(a)` of the problem's boundary condition.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum BvpStatus mixbvp_kernel_h(const struct BvpProblem *problem, double a, double *out);

// Nagumo derivative bound for solutions with `‖u‖∞ ≤ r`.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum BvpStatus mixbvp_nagumo_bound(const struct BvpProblem *problem, double r, double *out);

// Degree report for radii `r` and `R` with forcing `v ≡ 1` up to `alpha0`
// in ten steps and θ in ten steps.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum BvpStatus mixbvp_degree(const struct BvpProblem *problem,
                             double r,
                             double big_r,
                             double alpha0,
                             struct BvpDegreeSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIXBVP_H */
