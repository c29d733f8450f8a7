/* C interface to the coupled nonlinear Schrödinger solver. */

#ifndef NLS_H
#define NLS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirroring the library's error classes.
 */
typedef enum NlsStatus {
  NlsStatus_Ok = 0,
  NlsStatus_ConfigError = 2,
  NlsStatus_InvalidParameter = 3,
  NlsStatus_NoConvergence = 4,
  NlsStatus_NoMaximizer = 5,
  NlsStatus_DegenerateComponent = 6,
  NlsStatus_ShapeMismatch = 7,
  NlsStatus_TooLargeK = 8,
  NlsStatus_IoError = 9,
  NlsStatus_NullPointer = 10,
  NlsStatus_Panic = 11,
} NlsStatus;

/**
 * Opaque radial grid.
 */
typedef struct NlsGrid NlsGrid;

/**
 * Opaque problem data (exponent, couplings, masses).
 */
typedef struct NlsParams NlsParams;

/**
 * Opaque solve report (state plus diagnostics).
 */
typedef struct NlsReport NlsReport;

/**
 * Opaque scalar soliton profile.
 */
typedef struct NlsSoliton NlsSoliton;

/**
 * Scalar summary of a soliton solve.
 */
typedef struct NlsSolitonInfo {
  double w0;
  double mass_sq;
  double grad_sq;
  double lp_norm_p;
  double boundary_value;
  double nehari_residual;
  double pohozaev_residual;
  double gn_constant;
} NlsSolitonInfo;

/**
 * Outcome of a closed-form condition check.
 */
typedef struct NlsCondition {
  double lhs;
  double rhs;
  double margin;
  /**
   * 1 when lhs < rhs.
   */
  int32_t satisfied;
} NlsCondition;

/**
 * Create problem data from a row-major k×k coupling matrix and k masses.
 *
 * # Safety
 * `beta` must point to k·k doubles, `rho` to k doubles, and `out` must
 * be a valid destination.
 */
enum NlsStatus nls_params_new(double p,
                              const double *beta,
                              const double *rho,
                              uintptr_t k,
                              struct NlsParams **out);

/**
 * # Safety
 * `handle` must come from `nls_params_new` and not be used afterwards.
 */
void nls_params_free(struct NlsParams *handle);

/**
 * Create a radial grid; `kind` is 0 for uniform, 1 for graded.
 *
 * # Safety
 * `out` must be a valid destination.
 */
enum NlsStatus nls_grid_new(uintptr_t n, double r_max, int32_t kind, struct NlsGrid **out);

/**
 * # Safety
 * `handle` must come from `nls_grid_new` and not be used afterwards.
 */
void nls_grid_free(struct NlsGrid *handle);

/**
 * Shooting solve of the scalar ground-state profile.
 *
 * # Safety
 * `grid` must be a live grid handle; `out` a valid destination.
 */
enum NlsStatus nls_solve_kwong(double p,
                               const struct NlsGrid *grid,
                               double tol,
                               struct NlsSoliton **out);

/**
 * # Safety
 * `handle` must be live; `info` a valid destination.
 */
enum NlsStatus nls_soliton_info(const struct NlsSoliton *handle, struct NlsSolitonInfo *info);

/**
 * # Safety
 * `handle` must come from `nls_solve_kwong` and not be used afterwards.
 */
void nls_soliton_free(struct NlsSoliton *handle);

/**
 * Ground-state solve on a problem-adapted grid with default options.
 *
 * # Safety
 * `params` must be live; `out` a valid destination.
 */
enum NlsStatus nls_ground_state(const struct NlsParams *params,
                                uint64_t seed,
                                struct NlsReport **out);

/**
 * # Safety
 * `handle` must be live.
 */
double nls_report_energy(const struct NlsReport *handle);

/**
 * # Safety
 * `handle` must be live.
 */
int32_t nls_report_converged(const struct NlsReport *handle);

/**
 * # Safety
 * `handle` must be live.
 */
double nls_report_el_residual(const struct NlsReport *handle);

/**
 * Number of components in the report's state.
 *
 * # Safety
 * `handle` must be live.
 */
uintptr_t nls_report_components(const struct NlsReport *handle);

/**
 * Multiplier λ_i of component i (NaN when out of range).
 *
 * # Safety
 * `handle` must be live.
 */
double nls_report_lambda(const struct NlsReport *handle, uintptr_t i);

/**
 * Number of grid nodes carried by the report's state.
 *
 * # Safety
 * `handle` must be live.
 */
uintptr_t nls_report_len(const struct NlsReport *handle);

/**
 * Copy node radii and component-i samples into caller buffers of
 * length `len` (`nls_report_len`).
 *
 * # Safety
 * `radii` and `values` must point to at least `len` doubles.
 */
enum NlsStatus nls_report_component(const struct NlsReport *handle,
                                    uintptr_t i,
                                    double *radii,
                                    double *values,
                                    uintptr_t len);

/**
 * JSON summary of the report (energy, residuals, multipliers, masses);
 * free with `nls_string_free`.
 *
 * # Safety
 * `handle` must be live; `out` a valid destination.
 */
enum NlsStatus nls_report_summary_json(const struct NlsReport *handle, char **out);

/**
 * # Safety
 * `handle` must come from `nls_ground_state` and not be used afterwards.
 */
void nls_report_free(struct NlsReport *handle);

/**
 * # Safety
 * `s` must come from `nls_report_summary_json`.
 */
void nls_string_free(char *s);

/**
 * Evaluate the subset existence condition for the given problem.
 *
 * # Safety
 * `params` must be live; `out` a valid destination.
 */
enum NlsStatus nls_check_betacond(const struct NlsParams *params, struct NlsCondition *out);

/**
 * Decoupled ground-state levels c_i written into a caller buffer of
 * length k.
 *
 * # Safety
 * `params` must be live; `levels` must point to k doubles.
 */
enum NlsStatus nls_decoupled_levels(const struct NlsParams *params, double *levels, uintptr_t k);

#endif  /* NLS_H */
