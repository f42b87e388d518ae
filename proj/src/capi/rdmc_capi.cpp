// SPDX-License-Identifier: Apache-2.0
#include "rdmc/rdmc.h"

#include <cmath>
#include <exception>
#include <limits>
#include <new>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rdmc/bandwidth.hpp"
#include "rdmc/dataset.hpp"
#include "rdmc/inference.hpp"
#include "rdmc/kernels.hpp"
#include "rdmc/llr.hpp"
#include "rdmc/nuisance.hpp"
#include "rdmc/simulation.hpp"
#include "rdmc/threshold.hpp"

#ifndef RDMC_VERSION_STRING
#define RDMC_VERSION_STRING "0.0.0"
#endif

struct rdmc_dataset {
  rdmc::Dataset data;
  std::vector<std::string> warnings;
};

struct rdmc_propensity {
  rdmc::PropensityFit fit;
  std::string spec;
};

struct rdmc_outcome {
  rdmc::OutcomeFit fit;
  std::string spec;
};

struct rdmc_curve {
  rdmc::Curve curve;
};

struct rdmc_bandwidth {
  rdmc::BandwidthSelection selection;
};

struct rdmc_density {
  std::variant<rdmc::DensityEstimate, rdmc::NormalDensity> impl;

  double operator()(double x) const {
    return std::visit([x](const auto& d) { return d(x); }, impl);
  }
  rdmc::DensityFn fn() const {
    return [this](double x) { return (*this)(x); };
  }
};

struct rdmc_effect {
  rdmc::EffectCurve effect;
};

struct rdmc_threshold {
  rdmc::ThresholdResult result;
};

struct rdmc_bench {
  rdmc::BenchmarkReport report;
  std::vector<std::string> estimator_labels;
  std::vector<std::string> nuisance_labels;
};

namespace {

thread_local std::string last_error;

struct InvalidArgument {
  std::string message;
};

rdmc_status fail(rdmc_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs body, translating exceptions into status codes and the thread-local message.
template <typename Body>
rdmc_status guarded(Body&& body) {
  try {
    last_error.clear();
    body();
    return RDMC_OK;
  } catch (const rdmc::Error& e) {
    return fail(static_cast<rdmc_status>(static_cast<int>(e.code())), e.what());
  } catch (const InvalidArgument& e) {
    return fail(RDMC_E_INVALID_ARGUMENT, e.message);
  } catch (const std::bad_alloc&) {
    return fail(RDMC_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RDMC_E_INTERNAL, e.what());
  } catch (...) {
    return fail(RDMC_E_INTERNAL, "unknown failure");
  }
}

template <typename T>
void require(const T* p, const char* what) {
  if (p == nullptr) throw InvalidArgument{std::string(what) + " must not be NULL"};
}

rdmc::KernelSpec kernel_of(rdmc_kernel k) {
  switch (k) {
    case RDMC_KERNEL_EPANECHNIKOV: return {rdmc::KernelFamily::epanechnikov};
    case RDMC_KERNEL_GAUSSIAN: return {rdmc::KernelFamily::gaussian};
    case RDMC_KERNEL_TRIANGULAR: return {rdmc::KernelFamily::triangular};
  }
  throw InvalidArgument{"unknown kernel"};
}

rdmc::EstimatorMethod method_of(rdmc_method m, int ipw_group) {
  switch (m) {
    case RDMC_METHOD_NAIVE: return rdmc::EstimatorMethod::naive();
    case RDMC_METHOD_DR: return rdmc::EstimatorMethod::dr();
    case RDMC_METHOD_IPW:
      if (ipw_group == 0 || ipw_group == 1) return rdmc::EstimatorMethod::ipw(ipw_group);
      if (ipw_group == -1) return rdmc::EstimatorMethod::ipw();
      throw InvalidArgument{"ipw_group must be -1, 0 or 1"};
  }
  throw InvalidArgument{"unknown estimator method"};
}

rdmc::TargetOutcome target_of(int j) {
  if (j != 0 && j != 1) throw InvalidArgument{"target must be 0 or 1"};
  return rdmc::TargetOutcome(j);
}

rdmc::SimConfig config_of(const rdmc_sim_config& c) {
  rdmc::SimConfig s;
  s.n = c.n;
  s.mu_x = c.mu_x;
  s.sigma_x = c.sigma_x;
  for (int k = 0; k < 2; ++k) {
    s.eta0[k] = c.eta0[k];
    s.eta1[k] = c.eta1[k];
  }
  s.sigma_xi = c.sigma_xi;
  for (int k = 0; k < 4; ++k) s.gamma[k] = c.gamma[k];
  for (int k = 0; k < 5; ++k) {
    s.beta0[k] = c.beta0[k];
    s.beta1[k] = c.beta1[k];
  }
  s.sigma_eps = c.sigma_eps;
  s.c0 = c.c0;
  s.c1 = c.c1;
  if (c.x_dist != RDMC_X_NORMAL && c.x_dist != RDMC_X_LOGNORMAL) {
    throw InvalidArgument{"unknown running-variable distribution"};
  }
  s.x_dist = c.x_dist == RDMC_X_LOGNORMAL ? rdmc::XDistribution::lognormal
                                          : rdmc::XDistribution::normal;
  return s;
}

rdmc::CostSpec cost_of(const rdmc_cost& c) {
  if (!c.tabulated) return rdmc::CostSpec::constant(c.value);
  if (c.n > 0 && (c.x == nullptr || c.mc == nullptr)) {
    throw InvalidArgument{"tabulated cost needs x and mc arrays"};
  }
  return rdmc::CostSpec::tabulated(std::vector<double>(c.x, c.x + c.n),
                                   std::vector<double>(c.mc, c.mc + c.n));
}

rdmc_dataset* wrap(rdmc::Dataset ds) {
  auto* out = new rdmc_dataset{std::move(ds), {}};
  for (const auto& f : rdmc::validate(out->data)) {
    if (f.severity == rdmc::Severity::warning) out->warnings.push_back(f.code + ": " + f.message);
  }
  return out;
}

const rdmc::PropensityFit* pfit_of(const rdmc_propensity* p) { return p ? &p->fit : nullptr; }
const rdmc::OutcomeFit* ofit_of(const rdmc_outcome* o) { return o ? &o->fit : nullptr; }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

extern "C" {

const char* rdmc_version(void) { return RDMC_VERSION_STRING; }

const char* rdmc_last_error(void) { return last_error.c_str(); }

const char* rdmc_status_name(rdmc_status status) {
  if (status == RDMC_OK) return "ok";
  if (status == RDMC_E_INVALID_ARGUMENT) return "invalid_argument";
  if (status == RDMC_E_INTERNAL) return "internal";
  if (status >= RDMC_E_IO && status <= RDMC_E_CONVERGENCE) {
    return rdmc::to_string(static_cast<rdmc::ErrorCode>(static_cast<int>(status)));
  }
  return "unknown";
}

// ---- datasets -------------------------------------------------------------

rdmc_status rdmc_dataset_load(const char* path, const rdmc_schema* schema, double c0, double c1,
                              rdmc_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    rdmc::Schema s;
    if (schema != nullptr) {
      if (schema->x) s.x = schema->x;
      if (schema->d) s.d = schema->d;
      if (schema->y) s.y = schema->y;
      if (schema->z) s.z = std::string(schema->z);
      if (schema->covariate_count > 0) require(schema->covariates, "schema covariates");
      for (std::size_t k = 0; k < schema->covariate_count; ++k) {
        require(schema->covariates[k], "covariate name");
        s.w.emplace_back(schema->covariates[k]);
      }
      if (schema->delimiter != 0) s.delimiter = schema->delimiter;
    }
    *out = wrap(rdmc::load_dataset(path, s, rdmc::Thresholds{c0, c1}));
  });
}

rdmc_status rdmc_dataset_write(const rdmc_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset, "dataset");
    require(path, "path");
    rdmc::write_dataset(dataset->data, path);
  });
}

void rdmc_dataset_free(rdmc_dataset* dataset) { delete dataset; }

size_t rdmc_dataset_size(const rdmc_dataset* dataset) {
  return dataset ? dataset->data.size() : 0;
}

size_t rdmc_dataset_covariate_count(const rdmc_dataset* dataset) {
  return dataset ? dataset->data.covariate_count() : 0;
}

const char* rdmc_dataset_covariate_name(const rdmc_dataset* dataset, size_t k) {
  if (!dataset || k >= dataset->data.covariate_names.size()) return nullptr;
  return dataset->data.covariate_names[k].c_str();
}

void rdmc_dataset_thresholds(const rdmc_dataset* dataset, double* c0, double* c1) {
  if (!dataset) return;
  if (c0) *c0 = dataset->data.thresholds.c0;
  if (c1) *c1 = dataset->data.thresholds.c1;
}

rdmc_status rdmc_dataset_running_variable(const rdmc_dataset* dataset, double* out,
                                          size_t capacity) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    if (capacity < dataset->data.size()) {
      throw InvalidArgument{"output buffer holds " + std::to_string(capacity) + " values but " +
                            std::to_string(dataset->data.size()) + " are needed"};
    }
    for (std::size_t i = 0; i < dataset->data.size(); ++i) out[i] = dataset->data.units[i].x;
  });
}

void rdmc_dataset_region_counts(const rdmc_dataset* dataset, size_t counts[4]) {
  if (!dataset || !counts) return;
  const auto rc = rdmc::region_census(dataset->data);
  counts[0] = rc.c;
  counts[1] = rc.b;
  counts[2] = rc.a;
  counts[3] = rc.d;
}

size_t rdmc_dataset_warning_count(const rdmc_dataset* dataset) {
  return dataset ? dataset->warnings.size() : 0;
}

const char* rdmc_dataset_warning(const rdmc_dataset* dataset, size_t i) {
  if (!dataset || i >= dataset->warnings.size()) return nullptr;
  return dataset->warnings[i].c_str();
}

// ---- simulation -----------------------------------------------------------

void rdmc_sim_config_default(rdmc_sim_config* config) {
  if (!config) return;
  const rdmc::SimConfig s;
  config->n = s.n;
  config->mu_x = s.mu_x;
  config->sigma_x = s.sigma_x;
  for (int k = 0; k < 2; ++k) {
    config->eta0[k] = s.eta0[k];
    config->eta1[k] = s.eta1[k];
  }
  config->sigma_xi = s.sigma_xi;
  for (int k = 0; k < 4; ++k) config->gamma[k] = s.gamma[k];
  for (int k = 0; k < 5; ++k) {
    config->beta0[k] = s.beta0[k];
    config->beta1[k] = s.beta1[k];
  }
  config->sigma_eps = s.sigma_eps;
  config->c0 = s.c0;
  config->c1 = s.c1;
  config->x_dist = RDMC_X_NORMAL;
}

rdmc_status rdmc_simulate(const rdmc_sim_config* config, uint64_t seed, rdmc_dataset** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = wrap(rdmc::generate(config_of(*config), seed));
  });
}

rdmc_status rdmc_true_curve(const rdmc_sim_config* config, int target, double coeffs[3]) {
  return guarded([&] {
    require(config, "config");
    require(coeffs, "coeffs");
    const auto g = rdmc::true_curve(config_of(*config), target_of(target));
    coeffs[0] = g.q0;
    coeffs[1] = g.q1;
    coeffs[2] = g.q2;
  });
}

// ---- nuisance models ------------------------------------------------------

rdmc_status rdmc_propensity_fit(const rdmc_dataset* dataset, const char* spec, rdmc_link link,
                                rdmc_propensity** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    const auto fs = spec ? rdmc::FeatureSpec::parse_list(spec)
                         : rdmc::FeatureSpec::propensity_default(dataset->data.covariate_count());
    rdmc::PropensityOptions options;
    if (link != RDMC_LINK_LOGIT && link != RDMC_LINK_PROBIT) {
      throw InvalidArgument{"unknown link"};
    }
    options.link = link == RDMC_LINK_PROBIT ? rdmc::Link::probit : rdmc::Link::logit;
    auto fit = rdmc::fit_propensity(dataset->data, fs, options);
    *out = new rdmc_propensity{std::move(fit), fs.joined()};
  });
}

void rdmc_propensity_free(rdmc_propensity* fit) { delete fit; }

const char* rdmc_propensity_spec(const rdmc_propensity* fit) {
  return fit ? fit->spec.c_str() : nullptr;
}

size_t rdmc_propensity_coefficients(const rdmc_propensity* fit, double* out, size_t capacity) {
  if (!fit) return 0;
  const auto n = static_cast<std::size_t>(fit->fit.gamma.size());
  for (std::size_t k = 0; k < n && k < capacity && out; ++k) {
    out[k] = fit->fit.gamma(static_cast<Eigen::Index>(k));
  }
  return n;
}

int rdmc_propensity_converged(const rdmc_propensity* fit) {
  return fit && fit->fit.converged ? 1 : 0;
}

int rdmc_propensity_iterations(const rdmc_propensity* fit) {
  return fit ? fit->fit.iterations : 0;
}

rdmc_status rdmc_propensity_predict(const rdmc_propensity* fit, double x, const double* w,
                                    size_t w_count, double* out) {
  return guarded([&] {
    require(fit, "fit");
    require(out, "out");
    if (w_count > 0) require(w, "w");
    *out = rdmc::predict_propensity(fit->fit, x, std::span<const double>(w, w_count));
  });
}

rdmc_status rdmc_outcome_fit(const rdmc_dataset* dataset, int target, const char* spec,
                             rdmc_outcome** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    const auto fs = spec ? rdmc::FeatureSpec::parse_list(spec)
                         : rdmc::FeatureSpec::outcome_default(dataset->data.covariate_count());
    auto fit = rdmc::fit_outcome(dataset->data, target_of(target), fs);
    *out = new rdmc_outcome{std::move(fit), fs.joined()};
  });
}

void rdmc_outcome_free(rdmc_outcome* fit) { delete fit; }

const char* rdmc_outcome_spec(const rdmc_outcome* fit) { return fit ? fit->spec.c_str() : nullptr; }

size_t rdmc_outcome_coefficients(const rdmc_outcome* fit, double* out, size_t capacity) {
  if (!fit) return 0;
  const auto n = static_cast<std::size_t>(fit->fit.eta.size());
  for (std::size_t k = 0; k < n && k < capacity && out; ++k) {
    out[k] = fit->fit.eta(static_cast<Eigen::Index>(k));
  }
  return n;
}

rdmc_status rdmc_outcome_predict(const rdmc_outcome* fit, double x, const double* w,
                                 size_t w_count, double* out) {
  return guarded([&] {
    require(fit, "fit");
    require(out, "out");
    if (w_count > 0) require(w, "w");
    *out = rdmc::predict_outcome(fit->fit, x, std::span<const double>(w, w_count));
  });
}

// ---- curves ---------------------------------------------------------------

rdmc_status rdmc_curve_estimate(const rdmc_dataset* dataset, int target,
                                const rdmc_estimator* estimator, double h,
                                const rdmc_propensity* propensity, const rdmc_outcome* outcome,
                                const double* grid, size_t grid_size, rdmc_curve** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(estimator, "estimator");
    require(out, "out");
    const auto g = grid ? std::vector<double>(grid, grid + grid_size)
                        : rdmc::default_grid(dataset->data.thresholds, grid_size);
    auto curve = rdmc::estimate_curve(dataset->data, target_of(target),
                                      method_of(estimator->method, estimator->ipw_group), h,
                                      pfit_of(propensity), ofit_of(outcome), g,
                                      kernel_of(estimator->kernel));
    *out = new rdmc_curve{std::move(curve)};
  });
}

rdmc_status rdmc_curve_from_arrays(int target, rdmc_method method, rdmc_kernel kernel, double h,
                                   double c0, double c1, const double* grid,
                                   const double* values, const double* slopes,
                                   const double* variance, size_t n, rdmc_curve** out) {
  return guarded([&] {
    require(out, "out");
    if (n == 0) throw InvalidArgument{"curve needs at least one grid point"};
    require(grid, "grid");
    require(values, "values");
    if (!(h > 0.0)) throw InvalidArgument{"bandwidth must be positive"};
    if (!(c0 < c1)) throw InvalidArgument{"thresholds must satisfy c0 < c1"};
    for (std::size_t k = 1; k < n; ++k) {
      if (!(grid[k] > grid[k - 1])) throw InvalidArgument{"grid must be strictly increasing"};
    }
    rdmc::Curve c;
    c.target = target_of(target);
    c.method = method_of(method, -1);
    c.kernel = kernel_of(kernel);
    c.bandwidth = h;
    c.thresholds = {c0, c1};
    c.grid.assign(grid, grid + n);
    c.values.assign(values, values + n);
    c.slopes = slopes ? std::vector<double>(slopes, slopes + n) : std::vector<double>(n, kNaN);
    if (variance) c.variance.assign(variance, variance + n);
    *out = new rdmc_curve{std::move(c)};
  });
}

rdmc_status rdmc_curve_restrict(const rdmc_curve* curve, double lo, double hi, rdmc_curve** out) {
  return guarded([&] {
    require(curve, "curve");
    require(out, "out");
    *out = new rdmc_curve{rdmc::restrict_to_open_interval(curve->curve, lo, hi)};
  });
}

void rdmc_curve_free(rdmc_curve* curve) { delete curve; }

size_t rdmc_curve_size(const rdmc_curve* curve) { return curve ? curve->curve.size() : 0; }

const double* rdmc_curve_grid(const rdmc_curve* curve) {
  return curve ? curve->curve.grid.data() : nullptr;
}

const double* rdmc_curve_values(const rdmc_curve* curve) {
  return curve ? curve->curve.values.data() : nullptr;
}

const double* rdmc_curve_slopes(const rdmc_curve* curve) {
  return curve ? curve->curve.slopes.data() : nullptr;
}

const double* rdmc_curve_variance(const rdmc_curve* curve) {
  return curve && curve->curve.has_variance() ? curve->curve.variance.data() : nullptr;
}

double rdmc_curve_bandwidth(const rdmc_curve* curve) {
  return curve ? curve->curve.bandwidth : kNaN;
}

int rdmc_curve_target(const rdmc_curve* curve) { return curve ? curve->curve.target.j() : -1; }

size_t rdmc_curve_failure_count(const rdmc_curve* curve) {
  return curve ? curve->curve.failures.size() : 0;
}

rdmc_status rdmc_curve_failure(const rdmc_curve* curve, size_t i, size_t* grid_index, double* x,
                               rdmc_status* code, const char** message) {
  return guarded([&] {
    require(curve, "curve");
    if (i >= curve->curve.failures.size()) throw InvalidArgument{"failure index out of range"};
    const auto& f = curve->curve.failures[i];
    if (grid_index) *grid_index = f.index;
    if (x) *x = f.x;
    if (code) *code = static_cast<rdmc_status>(static_cast<int>(f.code));
    if (message) *message = f.message.c_str();
  });
}

rdmc_status rdmc_curve_attach_variance(rdmc_curve* curve, const rdmc_dataset* dataset,
                                       const rdmc_propensity* propensity,
                                       const rdmc_outcome* outcome, const rdmc_density* density) {
  return guarded([&] {
    require(curve, "curve");
    require(dataset, "dataset");
    require(propensity, "propensity");
    require(outcome, "outcome");
    require(density, "density");
    auto& c = curve->curve;
    c.variance = rdmc::dr_variance(dataset->data, c.target, c, propensity->fit, outcome->fit,
                                   c.kernel, c.bandwidth, density->fn());
  });
}

rdmc_status rdmc_curve_band(const rdmc_curve* curve, double level, double* lower, double* upper) {
  return guarded([&] {
    require(curve, "curve");
    require(lower, "lower");
    require(upper, "upper");
    const auto band = rdmc::confidence_band(curve->curve, level);
    std::copy(band.lower.begin(), band.lower.end(), lower);
    std::copy(band.upper.begin(), band.upper.end(), upper);
  });
}

rdmc_status rdmc_lscv_score(const rdmc_dataset* dataset, int target,
                            const rdmc_estimator* estimator, double h,
                            const rdmc_propensity* propensity, const rdmc_outcome* outcome,
                            double* score, size_t* n_used, size_t* n_excluded) {
  return guarded([&] {
    require(dataset, "dataset");
    require(estimator, "estimator");
    require(score, "score");
    const auto s = rdmc::lscv_score(dataset->data, target_of(target),
                                    method_of(estimator->method, estimator->ipw_group), h,
                                    pfit_of(propensity), ofit_of(outcome),
                                    kernel_of(estimator->kernel));
    *score = s.score;
    if (n_used) *n_used = s.n_used;
    if (n_excluded) *n_excluded = s.n_excluded;
  });
}

rdmc_status rdmc_loo_estimate(const rdmc_dataset* dataset, int target,
                              const rdmc_estimator* estimator, double h,
                              const rdmc_propensity* propensity, const rdmc_outcome* outcome,
                              size_t unit, double* out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(estimator, "estimator");
    require(out, "out");
    *out = rdmc::loo_estimate(dataset->data, target_of(target),
                              method_of(estimator->method, estimator->ipw_group), h,
                              pfit_of(propensity), ofit_of(outcome), unit,
                              kernel_of(estimator->kernel));
  });
}

// ---- bandwidth selection --------------------------------------------------

rdmc_status rdmc_bandwidth_select(const rdmc_dataset* dataset, int target,
                                  const rdmc_estimator* estimator,
                                  const rdmc_propensity* propensity, const rdmc_outcome* outcome,
                                  const double* h_grid, size_t h_count, int refine,
                                  rdmc_bandwidth** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(estimator, "estimator");
    require(out, "out");
    const auto t = target_of(target);
    rdmc::BandwidthSearch search;
    if (h_grid) {
      search.h_grid.assign(h_grid, h_grid + h_count);
    } else {
      search = rdmc::BandwidthSearch::default_for(dataset->data, t, h_count ? h_count : 20);
    }
    search.refine = refine != 0;
    auto sel = rdmc::select_bandwidth(dataset->data, t,
                                      method_of(estimator->method, estimator->ipw_group), search,
                                      pfit_of(propensity), ofit_of(outcome),
                                      kernel_of(estimator->kernel));
    *out = new rdmc_bandwidth{std::move(sel)};
  });
}

void rdmc_bandwidth_free(rdmc_bandwidth* selection) { delete selection; }

double rdmc_bandwidth_h(const rdmc_bandwidth* selection) {
  return selection ? selection->selection.h : kNaN;
}

double rdmc_bandwidth_score(const rdmc_bandwidth* selection) {
  return selection ? selection->selection.score : kNaN;
}

int rdmc_bandwidth_refined(const rdmc_bandwidth* selection) {
  return selection && selection->selection.refined ? 1 : 0;
}

size_t rdmc_bandwidth_profile_size(const rdmc_bandwidth* selection) {
  return selection ? selection->selection.profile.size() : 0;
}

rdmc_status rdmc_bandwidth_profile(const rdmc_bandwidth* selection, size_t i, double* h,
                                   double* score, size_t* n_excluded, const char** diagnostic) {
  return guarded([&] {
    require(selection, "selection");
    if (i >= selection->selection.profile.size()) {
      throw InvalidArgument{"profile index out of range"};
    }
    const auto& e = selection->selection.profile[i];
    if (h) *h = e.h;
    if (score) *score = e.score ? *e.score : kNaN;
    if (n_excluded) *n_excluded = e.n_excluded;
    if (diagnostic) *diagnostic = e.diagnostic.c_str();
  });
}

// ---- densities ------------------------------------------------------------

rdmc_status rdmc_density_kde(const double* xs, size_t n, rdmc_density** out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) require(xs, "xs");
    *out = new rdmc_density{rdmc::DensityEstimate::fit(std::span<const double>(xs, n))};
  });
}

rdmc_status rdmc_density_normal(double mean, double sd, rdmc_density** out) {
  return guarded([&] {
    require(out, "out");
    if (!(sd > 0.0) || !std::isfinite(mean)) {
      throw InvalidArgument{"normal density needs a finite mean and positive sd"};
    }
    *out = new rdmc_density{rdmc::NormalDensity{mean, sd}};
  });
}

void rdmc_density_free(rdmc_density* density) { delete density; }

double rdmc_density_evaluate(const rdmc_density* density, double x) {
  return density ? (*density)(x) : kNaN;
}

double rdmc_density_bandwidth(const rdmc_density* density) {
  if (!density) return kNaN;
  if (const auto* kde = std::get_if<rdmc::DensityEstimate>(&density->impl)) {
    return kde->bandwidth();
  }
  return 0.0;
}

// ---- treatment effect -----------------------------------------------------

rdmc_status rdmc_effect_estimate(const rdmc_curve* g0, const rdmc_curve* g1, double level,
                                 rdmc_effect** out) {
  return guarded([&] {
    require(g0, "g0");
    require(g1, "g1");
    require(out, "out");
    auto effect = rdmc::effect_curve(g0->curve, g1->curve);
    if (level != 0.0) rdmc::attach_confidence_band(effect, level);
    *out = new rdmc_effect{std::move(effect)};
  });
}

void rdmc_effect_free(rdmc_effect* effect) { delete effect; }

size_t rdmc_effect_size(const rdmc_effect* effect) { return effect ? effect->effect.size() : 0; }

const double* rdmc_effect_grid(const rdmc_effect* effect) {
  return effect ? effect->effect.grid.data() : nullptr;
}

const double* rdmc_effect_tau(const rdmc_effect* effect) {
  return effect ? effect->effect.tau.data() : nullptr;
}

const double* rdmc_effect_variance(const rdmc_effect* effect) {
  return effect && effect->effect.has_variance() ? effect->effect.variance.data() : nullptr;
}

const double* rdmc_effect_lower(const rdmc_effect* effect) {
  return effect && !effect->effect.ci_lower.empty() ? effect->effect.ci_lower.data() : nullptr;
}

const double* rdmc_effect_upper(const rdmc_effect* effect) {
  return effect && !effect->effect.ci_upper.empty() ? effect->effect.ci_upper.data() : nullptr;
}

double rdmc_effect_level(const rdmc_effect* effect) { return effect ? effect->effect.level : 0.0; }

// ---- threshold choice -----------------------------------------------------

rdmc_status rdmc_net_benefit(double c, const rdmc_curve* g0, const rdmc_curve* g1,
                             const rdmc_density* density, const rdmc_cost* cost, double* out) {
  return guarded([&] {
    require(g0, "g0");
    require(g1, "g1");
    require(density, "density");
    require(cost, "cost");
    require(out, "out");
    *out = rdmc::net_benefit(c, g0->curve, g1->curve, density->fn(), cost_of(*cost));
  });
}

rdmc_status rdmc_threshold_optimize(const rdmc_curve* g0, const rdmc_curve* g1,
                                    const rdmc_density* density, const rdmc_cost* cost,
                                    size_t resolution, rdmc_threshold** out) {
  return guarded([&] {
    require(g0, "g0");
    require(g1, "g1");
    require(density, "density");
    require(cost, "cost");
    require(out, "out");
    auto result = rdmc::optimize_threshold(g0->curve, g1->curve, density->fn(), cost_of(*cost),
                                           resolution ? resolution : 1001);
    *out = new rdmc_threshold{std::move(result)};
  });
}

void rdmc_threshold_free(rdmc_threshold* result) { delete result; }

double rdmc_threshold_c_opt(const rdmc_threshold* result) {
  return result ? result->result.c_opt : kNaN;
}

double rdmc_threshold_objective(const rdmc_threshold* result) {
  return result ? result->result.objective_at_opt : kNaN;
}

rdmc_boundary rdmc_threshold_boundary(const rdmc_threshold* result) {
  if (!result) return RDMC_BOUNDARY_INTERIOR;
  switch (result->result.boundary) {
    case rdmc::BoundaryFlag::at_c0: return RDMC_BOUNDARY_AT_C0;
    case rdmc::BoundaryFlag::at_c1: return RDMC_BOUNDARY_AT_C1;
    case rdmc::BoundaryFlag::interior: break;
  }
  return RDMC_BOUNDARY_INTERIOR;
}

size_t rdmc_threshold_profile_size(const rdmc_threshold* result) {
  return result ? result->result.objective_profile.size() : 0;
}

rdmc_status rdmc_threshold_profile(const rdmc_threshold* result, size_t i, double* c,
                                   double* objective) {
  return guarded([&] {
    require(result, "result");
    if (i >= result->result.objective_profile.size()) {
      throw InvalidArgument{"profile index out of range"};
    }
    if (c) *c = result->result.objective_profile[i].first;
    if (objective) *objective = result->result.objective_profile[i].second;
  });
}

// ---- benchmark ------------------------------------------------------------

rdmc_status rdmc_bench_run(const rdmc_sim_config* config, size_t replications,
                           uint64_t base_seed, const char* cells,
                           const rdmc_bench_options* options, rdmc_bench** out) {
  return guarded([&] {
    require(config, "config");
    require(cells, "cells");
    require(out, "out");
    rdmc::BenchmarkOptions o;
    if (options) {
      o.kernel = kernel_of(options->kernel);
      if (options->grid_points) o.grid_points = options->grid_points;
      if (options->bandwidth_points) o.bandwidth_points = options->bandwidth_points;
      if (options->fixed_h > 0.0) o.fixed_h = options->fixed_h;
    }
    auto report = rdmc::run_benchmark(config_of(*config), replications, base_seed,
                                      rdmc::benchmark_cells(cells), o);
    auto* b = new rdmc_bench{std::move(report), {}, {}};
    for (const auto& c : b->report.cells) {
      b->estimator_labels.push_back(c.cell.estimator_label());
      b->nuisance_labels.push_back(c.cell.nuisance_label());
    }
    *out = b;
  });
}

void rdmc_bench_free(rdmc_bench* report) { delete report; }

size_t rdmc_bench_cell_count(const rdmc_bench* report) {
  return report ? report->report.cells.size() : 0;
}

rdmc_status rdmc_bench_cell(const rdmc_bench* report, size_t i, const char** estimator,
                            const char** nuisance, int* target, double* mise,
                            size_t* replications, size_t* failed, double* mean_h) {
  return guarded([&] {
    require(report, "report");
    if (i >= report->report.cells.size()) throw InvalidArgument{"cell index out of range"};
    const auto& c = report->report.cells[i];
    if (estimator) *estimator = report->estimator_labels[i].c_str();
    if (nuisance) *nuisance = report->nuisance_labels[i].c_str();
    if (target) *target = c.cell.target.j();
    if (mise) *mise = c.mise;
    if (replications) *replications = c.replications;
    if (failed) *failed = c.failed;
    if (mean_h) *mean_h = c.mean_h;
  });
}

const double* rdmc_bench_cell_ise(const rdmc_bench* report, size_t i) {
  if (!report || i >= report->report.cells.size()) return nullptr;
  return report->report.cells[i].ise.data();
}

int rdmc_bench_degraded(const rdmc_bench* report) {
  return report && report->report.degraded ? 1 : 0;
}

double rdmc_bench_runtime(const rdmc_bench* report) {
  return report ? report->report.runtime_seconds : kNaN;
}

}  // extern "C"
