#ifndef ARM_H
#define ARM_H

/* Generated by cbindgen from the arm-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef struct ArmMatrix ArmMatrix;
typedef struct ArmSolveResult ArmSolveResult;
typedef struct ArmLabels ArmLabels;

// Residual norm selector for [`ArmSolverOptions`].
typedef enum ArmErrorModel {
  // Squared Frobenius norm.
  ArmErrorModel_Frobenius = 0,
  // Entrywise l1 norm.
  ArmErrorModel_L1 = 1,
  // Column-wise l2,1 norm.
  ArmErrorModel_L21 = 2,
} ArmErrorModel;

// Surrogate selector for [`ArmSolverOptions`].
typedef enum ArmMethod {
  // Arctangent rank surrogate.
  ArmMethod_Arctan = 0,
  // Nuclear norm baseline.
  ArmMethod_Nuclear = 1,
} ArmMethod;

// Status code returned by fallible entry points.
typedef enum ArmStatus {
  // Success.
  ArmStatus_Ok = 0,
  // A required pointer argument was null.
  ArmStatus_NullPointer = 1,
  // Arguments failed validation (dimensions, flags, option values).
  ArmStatus_InvalidArgument = 2,
  // The computation produced or encountered non-finite values.
  ArmStatus_NumericalError = 3,
  // The solver exhausted its iteration cap; the result is still usable.
  ArmStatus_NotConverged = 4,
  // An internal panic was caught at the boundary.
  ArmStatus_Panic = 5,
} ArmStatus;

// Solver parameters; obtain defaults from [`arm_solver_options_default`]
// and override fields as needed.
typedef struct ArmSolverOptions {
  // Residual penalty weight.
  double lambda;
  // Initial augmented-Lagrangian penalty.
  double mu0;
  // Penalty growth factor per sweep.
  double rho;
  // Relative feasibility tolerance.
  double rel_tol;
  // Sweep cap.
  uintptr_t max_iters;
  // Residual norm.
  enum ArmErrorModel error_model;
  // Surrogate choice.
  enum ArmMethod method;
} ArmSolverOptions;

// Message describing the most recent failure on this thread, as a
// NUL-terminated UTF-8 string. Never null; empty before the first failure.
const char *arm_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *arm_version(void);

// Default solver options (the general-purpose configuration:
// lambda=2, mu0=10, rho=1.05, l2,1 residuals, arctangent surrogate).
struct ArmSolverOptions arm_solver_options_default(void);

// Creates a matrix from a row-major `rows x cols` buffer; returns null on
// invalid input (zero dimension, null data, non-finite entries).
//
// # Safety
// `data` must point to `rows * cols` readable doubles.
ArmMatrix *arm_matrix_new(uintptr_t rows, uintptr_t cols, const double *data);

// Number of rows; 0 if `m` is null.
uintptr_t arm_matrix_rows(const ArmMatrix *m);

// Number of columns; 0 if `m` is null.
uintptr_t arm_matrix_cols(const ArmMatrix *m);

// Copies entry `(row, col)` into `out`.
enum ArmStatus arm_matrix_get(const ArmMatrix *m, uintptr_t row, uintptr_t col, double *out);

// Releases a matrix handle; accepts null.
void arm_matrix_free(ArmMatrix *m);

// Solves for the self-expressive representation of `x`.
//
// `options` may be null for defaults. On `Ok` and `NotConverged`, `*out`
// receives a result handle owned by the caller.
enum ArmStatus arm_solve(const ArmMatrix *x,
                         const struct ArmSolverOptions *options,
                         ArmSolveResult **out);

// Representation matrix `Z` of a solve; caller owns the returned handle.
ArmMatrix *arm_solve_result_z(const ArmSolveResult *result);

// Residual matrix `E` of a solve; caller owns the returned handle.
ArmMatrix *arm_solve_result_e(const ArmSolveResult *result);

// Number of ALM sweeps performed; 0 if `result` is null.
uintptr_t arm_solve_result_iterations(const ArmSolveResult *result);

// Whether the solve met its feasibility tolerance; false if null.
bool arm_solve_result_converged(const ArmSolveResult *result);

// Releases a solve result handle; accepts null.
void arm_solve_result_free(ArmSolveResult *result);

// Full pipeline: solve, affinity graph, normalized cuts into `k` groups.
//
// `alpha` is the affinity sharpening exponent (2 matches the library
// default), `seed` drives the k-means restarts. On `Ok` and
// `NotConverged`, `*out` receives a labels handle owned by the caller.
enum ArmStatus arm_cluster(const ArmMatrix *x,
                           uintptr_t k,
                           const struct ArmSolverOptions *options,
                           uint32_t alpha,
                           uint64_t seed,
                           ArmLabels **out);

// Number of labelled samples; 0 if `labels` is null.
uintptr_t arm_labels_len(const ArmLabels *labels);

// Copies the label of sample `index` into `out`.
enum ArmStatus arm_labels_get(const ArmLabels *labels, uintptr_t index, uintptr_t *out);

// Releases a labels handle; accepts null.
void arm_labels_free(ArmLabels *labels);

#endif  /* ARM_H */
