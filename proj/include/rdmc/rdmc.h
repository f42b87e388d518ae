// SPDX-License-Identifier: Apache-2.0
/*
 * rdmc: counterfactual curves and treatment effects between the thresholds of
 * a two-group sharp regression discontinuity design.
 *
 * Every fallible call returns an rdmc_status. On failure the message is
 * available from rdmc_last_error() on the same thread until the next call.
 * Objects are opaque; each *_free accepts NULL. Pointers returned by accessors
 * stay valid for the lifetime of the owning object.
 */
#ifndef RDMC_RDMC_H
#define RDMC_RDMC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(RDMC_BUILDING_LIBRARY)
#define RDMC_API __declspec(dllexport)
#else
#define RDMC_API __declspec(dllimport)
#endif
#else
#define RDMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rdmc_status {
  RDMC_OK = 0,
  RDMC_E_IO = 1,
  RDMC_E_SCHEMA = 2,
  RDMC_E_PARSE = 3,
  RDMC_E_VALIDATION = 4,
  RDMC_E_DOMAIN = 5,
  RDMC_E_SEPARATION = 6,
  RDMC_E_RANK = 7,
  RDMC_E_SAMPLE_SIZE = 8,
  RDMC_E_INSUFFICIENT_SUPPORT = 9,
  RDMC_E_CONDITIONING = 10,
  RDMC_E_CONFIGURATION = 11,
  RDMC_E_BANDWIDTH_INFEASIBLE = 12,
  RDMC_E_SELECTION = 13,
  RDMC_E_ALIGNMENT = 14,
  RDMC_E_DENSITY_FLOOR = 15,
  RDMC_E_DEGENERATE_SAMPLE = 16,
  RDMC_E_UNRELIABLE_ISE = 17,
  RDMC_E_CONVERGENCE = 18,
  RDMC_E_INVALID_ARGUMENT = 100,
  RDMC_E_INTERNAL = 101
} rdmc_status;

typedef enum rdmc_kernel {
  RDMC_KERNEL_EPANECHNIKOV = 0,
  RDMC_KERNEL_GAUSSIAN = 1,
  RDMC_KERNEL_TRIANGULAR = 2
} rdmc_kernel;

typedef enum rdmc_method { RDMC_METHOD_NAIVE = 0, RDMC_METHOD_IPW = 1, RDMC_METHOD_DR = 2 } rdmc_method;

typedef enum rdmc_link { RDMC_LINK_LOGIT = 0, RDMC_LINK_PROBIT = 1 } rdmc_link;

typedef enum rdmc_boundary {
  RDMC_BOUNDARY_INTERIOR = 0,
  RDMC_BOUNDARY_AT_C0 = 1,
  RDMC_BOUNDARY_AT_C1 = 2
} rdmc_boundary;

typedef enum rdmc_x_dist { RDMC_X_NORMAL = 0, RDMC_X_LOGNORMAL = 1 } rdmc_x_dist;

typedef struct rdmc_dataset rdmc_dataset;
typedef struct rdmc_propensity rdmc_propensity;
typedef struct rdmc_outcome rdmc_outcome;
typedef struct rdmc_curve rdmc_curve;
typedef struct rdmc_bandwidth rdmc_bandwidth;
typedef struct rdmc_density rdmc_density;
typedef struct rdmc_effect rdmc_effect;
typedef struct rdmc_threshold rdmc_threshold;
typedef struct rdmc_bench rdmc_bench;

RDMC_API const char* rdmc_version(void);
RDMC_API const char* rdmc_last_error(void);
/* Short lowercase name such as "alignment". */
RDMC_API const char* rdmc_status_name(rdmc_status status);

/* ---- datasets ---------------------------------------------------------- */

typedef struct rdmc_schema {
  const char* x; /* NULL means "x" */
  const char* d; /* NULL means "d" */
  const char* y; /* NULL means "y" */
  const char* z; /* NULL derives treatment from x, d and the thresholds */
  const char* const* covariates;
  size_t covariate_count;
  char delimiter; /* 0 means ',' */
} rdmc_schema;

RDMC_API rdmc_status rdmc_dataset_load(const char* path, const rdmc_schema* schema, double c0,
                                       double c1, rdmc_dataset** out);
/* Columns x, covariates, d, z, y. */
RDMC_API rdmc_status rdmc_dataset_write(const rdmc_dataset* dataset, const char* path);
RDMC_API void rdmc_dataset_free(rdmc_dataset* dataset);

RDMC_API size_t rdmc_dataset_size(const rdmc_dataset* dataset);
RDMC_API size_t rdmc_dataset_covariate_count(const rdmc_dataset* dataset);
RDMC_API const char* rdmc_dataset_covariate_name(const rdmc_dataset* dataset, size_t k);
RDMC_API void rdmc_dataset_thresholds(const rdmc_dataset* dataset, double* c0, double* c1);
/* Copies the running variable into out[0..n). */
RDMC_API rdmc_status rdmc_dataset_running_variable(const rdmc_dataset* dataset, double* out,
                                                   size_t capacity);
/* Counts of regions (c) d=0,z=0; (b) d=0,z=1; (a) d=1,z=0; (d) d=1,z=1. */
RDMC_API void rdmc_dataset_region_counts(const rdmc_dataset* dataset, size_t counts[4]);
/* Non-fatal validation findings recorded at load or simulation time. */
RDMC_API size_t rdmc_dataset_warning_count(const rdmc_dataset* dataset);
RDMC_API const char* rdmc_dataset_warning(const rdmc_dataset* dataset, size_t i);

/* ---- simulation -------------------------------------------------------- */

typedef struct rdmc_sim_config {
  size_t n;
  double mu_x;
  double sigma_x;
  double eta0[2];
  double eta1[2];
  double sigma_xi;
  double gamma[4];
  double beta0[5];
  double beta1[5];
  double sigma_eps;
  double c0;
  double c1;
  rdmc_x_dist x_dist;
} rdmc_sim_config;

RDMC_API void rdmc_sim_config_default(rdmc_sim_config* config);
RDMC_API rdmc_status rdmc_simulate(const rdmc_sim_config* config, uint64_t seed,
                                   rdmc_dataset** out);
/* g_j(x) = coeffs[0] + coeffs[1] x + coeffs[2] x^2. */
RDMC_API rdmc_status rdmc_true_curve(const rdmc_sim_config* config, int target,
                                     double coeffs[3]);

/* ---- nuisance models --------------------------------------------------- */

/* spec is a comma separated term list such as "1,x,w1,w2"; NULL selects the
 * default {1, x, w1..wm}. */
RDMC_API rdmc_status rdmc_propensity_fit(const rdmc_dataset* dataset, const char* spec,
                                         rdmc_link link, rdmc_propensity** out);
RDMC_API void rdmc_propensity_free(rdmc_propensity* fit);
RDMC_API const char* rdmc_propensity_spec(const rdmc_propensity* fit);
RDMC_API size_t rdmc_propensity_coefficients(const rdmc_propensity* fit, double* out,
                                             size_t capacity);
RDMC_API int rdmc_propensity_converged(const rdmc_propensity* fit);
RDMC_API int rdmc_propensity_iterations(const rdmc_propensity* fit);
RDMC_API rdmc_status rdmc_propensity_predict(const rdmc_propensity* fit, double x,
                                             const double* w, size_t w_count, double* out);

/* NULL spec selects the default {1, x, x^2, w1..wm}. */
RDMC_API rdmc_status rdmc_outcome_fit(const rdmc_dataset* dataset, int target, const char* spec,
                                      rdmc_outcome** out);
RDMC_API void rdmc_outcome_free(rdmc_outcome* fit);
RDMC_API const char* rdmc_outcome_spec(const rdmc_outcome* fit);
RDMC_API size_t rdmc_outcome_coefficients(const rdmc_outcome* fit, double* out,
                                          size_t capacity);
RDMC_API rdmc_status rdmc_outcome_predict(const rdmc_outcome* fit, double x, const double* w,
                                          size_t w_count, double* out);

/* ---- curve estimation -------------------------------------------------- */

typedef struct rdmc_estimator {
  rdmc_method method;
  int ipw_group; /* -1 uses group 1 for g0 and group 0 for g1 */
  rdmc_kernel kernel;
} rdmc_estimator;

/* Propensity and outcome fits may be NULL when the method does not use them.
 * grid NULL with grid_size n >= 2 uses n equispaced points on [c0, c1]. */
RDMC_API rdmc_status rdmc_curve_estimate(const rdmc_dataset* dataset, int target,
                                         const rdmc_estimator* estimator, double h,
                                         const rdmc_propensity* propensity,
                                         const rdmc_outcome* outcome, const double* grid,
                                         size_t grid_size, rdmc_curve** out);
/* Rebuilds a curve from tabulated values, e.g. read back from disk. NaN marks
 * an absent value; slopes and variance may be NULL. */
RDMC_API rdmc_status rdmc_curve_from_arrays(int target, rdmc_method method, rdmc_kernel kernel,
                                            double h, double c0, double c1, const double* grid,
                                            const double* values, const double* slopes,
                                            const double* variance, size_t n, rdmc_curve** out);
/* Copy keeping only grid points strictly inside (lo, hi). */
RDMC_API rdmc_status rdmc_curve_restrict(const rdmc_curve* curve, double lo, double hi,
                                         rdmc_curve** out);
RDMC_API void rdmc_curve_free(rdmc_curve* curve);

RDMC_API size_t rdmc_curve_size(const rdmc_curve* curve);
RDMC_API const double* rdmc_curve_grid(const rdmc_curve* curve);
RDMC_API const double* rdmc_curve_values(const rdmc_curve* curve);
RDMC_API const double* rdmc_curve_slopes(const rdmc_curve* curve);
/* NULL until a variance is attached. */
RDMC_API const double* rdmc_curve_variance(const rdmc_curve* curve);
RDMC_API double rdmc_curve_bandwidth(const rdmc_curve* curve);
RDMC_API int rdmc_curve_target(const rdmc_curve* curve);
RDMC_API size_t rdmc_curve_failure_count(const rdmc_curve* curve);
RDMC_API rdmc_status rdmc_curve_failure(const rdmc_curve* curve, size_t i, size_t* grid_index,
                                        double* x, rdmc_status* code, const char** message);

/* Plug-in pointwise variance of a doubly robust curve; the same fits used to
 * estimate it must be passed. */
RDMC_API rdmc_status rdmc_curve_attach_variance(rdmc_curve* curve, const rdmc_dataset* dataset,
                                                const rdmc_propensity* propensity,
                                                const rdmc_outcome* outcome,
                                                const rdmc_density* density);
/* Pointwise normal band value +/- z sqrt(variance). */
RDMC_API rdmc_status rdmc_curve_band(const rdmc_curve* curve, double level, double* lower,
                                     double* upper);

RDMC_API rdmc_status rdmc_lscv_score(const rdmc_dataset* dataset, int target,
                                     const rdmc_estimator* estimator, double h,
                                     const rdmc_propensity* propensity,
                                     const rdmc_outcome* outcome, double* score,
                                     size_t* n_used, size_t* n_excluded);
RDMC_API rdmc_status rdmc_loo_estimate(const rdmc_dataset* dataset, int target,
                                       const rdmc_estimator* estimator, double h,
                                       const rdmc_propensity* propensity,
                                       const rdmc_outcome* outcome, size_t unit, double* out);

/* ---- bandwidth selection ----------------------------------------------- */

/* h_grid NULL uses h_count log-spaced values from 0.1 to 2 standard deviations
 * of the in-range running variable (h_count 0 means 20). */
RDMC_API rdmc_status rdmc_bandwidth_select(const rdmc_dataset* dataset, int target,
                                           const rdmc_estimator* estimator,
                                           const rdmc_propensity* propensity,
                                           const rdmc_outcome* outcome, const double* h_grid,
                                           size_t h_count, int refine, rdmc_bandwidth** out);
RDMC_API void rdmc_bandwidth_free(rdmc_bandwidth* selection);
RDMC_API double rdmc_bandwidth_h(const rdmc_bandwidth* selection);
RDMC_API double rdmc_bandwidth_score(const rdmc_bandwidth* selection);
RDMC_API int rdmc_bandwidth_refined(const rdmc_bandwidth* selection);
RDMC_API size_t rdmc_bandwidth_profile_size(const rdmc_bandwidth* selection);
/* score is NaN for infeasible bandwidths; diagnostic is then non-empty. */
RDMC_API rdmc_status rdmc_bandwidth_profile(const rdmc_bandwidth* selection, size_t i, double* h,
                                            double* score, size_t* n_excluded,
                                            const char** diagnostic);

/* ---- densities --------------------------------------------------------- */

RDMC_API rdmc_status rdmc_density_kde(const double* xs, size_t n, rdmc_density** out);
RDMC_API rdmc_status rdmc_density_normal(double mean, double sd, rdmc_density** out);
RDMC_API void rdmc_density_free(rdmc_density* density);
RDMC_API double rdmc_density_evaluate(const rdmc_density* density, double x);
/* 0 for analytic densities. */
RDMC_API double rdmc_density_bandwidth(const rdmc_density* density);

/* ---- treatment effect -------------------------------------------------- */

/* level in (0, 1) attaches a pointwise band and needs both curves to carry a
 * variance; level 0 skips it. */
RDMC_API rdmc_status rdmc_effect_estimate(const rdmc_curve* g0, const rdmc_curve* g1,
                                          double level, rdmc_effect** out);
RDMC_API void rdmc_effect_free(rdmc_effect* effect);
RDMC_API size_t rdmc_effect_size(const rdmc_effect* effect);
RDMC_API const double* rdmc_effect_grid(const rdmc_effect* effect);
RDMC_API const double* rdmc_effect_tau(const rdmc_effect* effect);
RDMC_API const double* rdmc_effect_variance(const rdmc_effect* effect);
RDMC_API const double* rdmc_effect_lower(const rdmc_effect* effect);
RDMC_API const double* rdmc_effect_upper(const rdmc_effect* effect);
RDMC_API double rdmc_effect_level(const rdmc_effect* effect);

/* ---- threshold choice -------------------------------------------------- */

typedef struct rdmc_cost {
  int tabulated; /* 0: constant `value`; 1: linear interpolation of (x, mc) */
  double value;
  const double* x;
  const double* mc;
  size_t n;
} rdmc_cost;

RDMC_API rdmc_status rdmc_net_benefit(double c, const rdmc_curve* g0, const rdmc_curve* g1,
                                      const rdmc_density* density, const rdmc_cost* cost,
                                      double* out);
/* resolution 0 means 1001. */
RDMC_API rdmc_status rdmc_threshold_optimize(const rdmc_curve* g0, const rdmc_curve* g1,
                                             const rdmc_density* density, const rdmc_cost* cost,
                                             size_t resolution, rdmc_threshold** out);
RDMC_API void rdmc_threshold_free(rdmc_threshold* result);
RDMC_API double rdmc_threshold_c_opt(const rdmc_threshold* result);
RDMC_API double rdmc_threshold_objective(const rdmc_threshold* result);
RDMC_API rdmc_boundary rdmc_threshold_boundary(const rdmc_threshold* result);
RDMC_API size_t rdmc_threshold_profile_size(const rdmc_threshold* result);
RDMC_API rdmc_status rdmc_threshold_profile(const rdmc_threshold* result, size_t i, double* c,
                                            double* objective);

/* ---- Monte Carlo benchmark --------------------------------------------- */

typedef struct rdmc_bench_options {
  rdmc_kernel kernel;
  size_t grid_points;      /* 0 means 201 */
  size_t bandwidth_points; /* 0 means 20 */
  double fixed_h;          /* > 0 skips bandwidth selection */
} rdmc_bench_options;

/* cells is "table1", "table2" or "all"; options may be NULL. */
RDMC_API rdmc_status rdmc_bench_run(const rdmc_sim_config* config, size_t replications,
                                    uint64_t base_seed, const char* cells,
                                    const rdmc_bench_options* options, rdmc_bench** out);
RDMC_API void rdmc_bench_free(rdmc_bench* report);
RDMC_API size_t rdmc_bench_cell_count(const rdmc_bench* report);
RDMC_API rdmc_status rdmc_bench_cell(const rdmc_bench* report, size_t i, const char** estimator,
                                     const char** nuisance, int* target, double* mise,
                                     size_t* replications, size_t* failed, double* mean_h);
/* Per-replication integrated squared error (NaN for failed replications). */
RDMC_API const double* rdmc_bench_cell_ise(const rdmc_bench* report, size_t i);
RDMC_API int rdmc_bench_degraded(const rdmc_bench* report);
RDMC_API double rdmc_bench_runtime(const rdmc_bench* report);

#ifdef __cplusplus
}
#endif

#endif /* RDMC_RDMC_H */
