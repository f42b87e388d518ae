// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdmc/dataset.hpp"
#include "rdmc/error.hpp"
#include "rdmc/kernels.hpp"
#include "rdmc/nuisance.hpp"

namespace rdmc {

struct EstimatorMethod {
  enum class Kind { naive, ipw, dr };

  Kind kind = Kind::dr;
  /// Group whose complete cases the IPW estimator uses; only meaningful for ipw.
  std::optional<int> ipw_group;

  static EstimatorMethod naive() { return {Kind::naive, std::nullopt}; }
  static EstimatorMethod dr() { return {Kind::dr, std::nullopt}; }
  /// Without a group, g0 uses d = 1 (complete below c1) and g1 uses d = 0.
  static EstimatorMethod ipw(std::optional<int> group = std::nullopt);

  int resolved_ipw_group(TargetOutcome target) const;
  std::string label() const;

  bool operator==(const EstimatorMethod&) const = default;
};

std::optional<EstimatorMethod::Kind> parse_method_kind(std::string_view name);

inline constexpr std::size_t kNoUnit = std::numeric_limits<std::size_t>::max();

/// One term of a kernel-weighted least-squares problem. `weight` multiplies
/// the kernel weight; `unit` is the dataset row it came from.
struct WeightedSample {
  double x = 0.0;
  double y = 0.0;
  double weight = 1.0;
  std::size_t unit = kNoUnit;
};

/// Local intercept and slope at x0.
struct LocalFit {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
};

/// Kernel-weighted Gram matrix and right-hand side in the (1, x - x0) basis.
struct NormalEquations {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;  // sum K w {1, d, d^2}
  double t0 = 0.0, t1 = 0.0;            // sum K w y {1, d}
};

inline constexpr double kMaxConditionNumber = 1e12;

NormalEquations accumulate_normal_equations(std::span<const WeightedSample> samples, double x0,
                                            double h, KernelSpec kernel);

/// Minimizes sum K_h(x_i - x0) w_i (y_i - a0 - a1 (x_i - x0))^2.
/// Throws insufficient_support for fewer than two distinct in-support x, and
/// conditioning when the scaled 2x2 system has condition number above 1e12.
LocalFit local_linear_solve(std::span<const WeightedSample> samples, double x0, double h,
                            KernelSpec kernel);

/// The AIPW response for one unit:
///   r = 1(z = j), p = pi if d = 1 else 1 - pi,
///   y~ = (r / p) y - (r / p - 1) delta_j(x, w).
/// With a constant working variance the doubly robust estimating equations are
/// the local linear normal equations of y~ with unit weights.
double pseudo_outcome(const UnitRecord& unit, TargetOutcome target, const PropensityFit& pfit,
                      const OutcomeFit& ofit, const Thresholds& thresholds);

/// The estimation sample for one (target, method, nuisance fits) combination,
/// sorted by x. Evaluation at distinct points is read-only and thread safe.
class LocalLinearEstimator {
 public:
  static LocalLinearEstimator build(const Dataset& dataset, TargetOutcome target,
                                    const EstimatorMethod& method, const PropensityFit* pfit,
                                    const OutcomeFit* ofit, KernelSpec kernel);

  /// Local fit at x0, optionally leaving out the sample that came from `exclude_unit`.
  LocalFit fit_at(double x0, double h, std::size_t exclude_unit = kNoUnit) const;
  NormalEquations normal_equations_at(double x0, double h) const;

  std::span<const WeightedSample> samples() const { return samples_; }
  TargetOutcome target() const { return target_; }
  KernelSpec kernel() const { return kernel_; }

 private:
  std::span<const WeightedSample> window(double x0, double h) const;

  std::vector<WeightedSample> samples_;
  TargetOutcome target_;
  KernelSpec kernel_;
};

struct PointFailure {
  std::size_t index = 0;
  double x = 0.0;
  ErrorCode code = ErrorCode::insufficient_support;
  std::string message;
};

/// Estimated curve on a grid. Points whose local fit failed hold NaN and have
/// an entry in `failures`.
struct Curve {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> slopes;
  std::vector<double> variance;  ///< empty until a variance is attached
  TargetOutcome target;
  double bandwidth = 0.0;
  EstimatorMethod method;
  KernelSpec kernel;
  Thresholds thresholds;
  std::vector<PointFailure> failures;

  std::size_t size() const { return grid.size(); }
  bool has_value(std::size_t i) const { return !std::isnan(values[i]); }
  bool has_variance() const { return !variance.empty(); }
};

/// `points` equispaced values on [c0, c1], endpoints included.
std::vector<double> default_grid(const Thresholds& thresholds, std::size_t points = 201);

Curve estimate_curve(const Dataset& dataset, TargetOutcome target, const EstimatorMethod& method,
                     double h, const PropensityFit* pfit, const OutcomeFit* ofit,
                     std::span<const double> grid, KernelSpec kernel);

/// Estimate at X_i with unit i left out of the estimating equations; the
/// nuisance fits are not refit.
double loo_estimate(const Dataset& dataset, TargetOutcome target, const EstimatorMethod& method,
                    double h, const PropensityFit* pfit, const OutcomeFit* ofit, std::size_t i,
                    KernelSpec kernel);

}  // namespace rdmc
