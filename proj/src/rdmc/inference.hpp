// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rdmc/llr.hpp"

namespace rdmc {

/// A density of X evaluable at any point.
using DensityFn = std::function<double(double)>;

/// Gaussian-kernel density estimate with Silverman's rule of thumb
/// h = 0.9 min(sd, IQR / 1.34) n^(-1/5).
class DensityEstimate {
 public:
  /// Throws degenerate_sample for fewer than two distinct values.
  static DensityEstimate fit(std::span<const double> xs);

  double operator()(double x) const;
  double bandwidth() const { return bandwidth_; }
  std::size_t n() const { return xs_.size(); }

 private:
  std::vector<double> xs_;  // sorted
  double bandwidth_ = 0.0;
};

struct NormalDensity {
  double mean = 0.0;
  double sd = 1.0;

  double operator()(double x) const;
};

/// tau(x) = g1(x) - g0(x) on a grid strictly inside (c0, c1).
struct EffectCurve {
  std::vector<double> grid;
  std::vector<double> tau;
  std::vector<double> variance;  ///< sum of the two curve variances, when both carry one
  std::vector<double> ci_lower;
  std::vector<double> ci_upper;
  double level = 0.0;  ///< 0 until a band is attached
  Thresholds thresholds;

  std::size_t size() const { return grid.size(); }
  bool has_variance() const { return !variance.empty(); }
};

/// Throws alignment when the grids differ, the thresholds differ, the targets
/// are not (g0, g1), or any grid point lies outside the open interval (c0, c1).
EffectCurve effect_curve(const Curve& g0, const Curve& g1);

/// Keeps only the grid points strictly inside (lo, hi).
Curve restrict_to_open_interval(const Curve& curve, double lo, double hi);

/// Pointwise plug-in variance of a doubly robust curve: r_K m2(x) / (f(x) n h)
/// where m2 is the kernel-weighted average of the squared influence term
/// psi_i = y~_i - g(X_i). Throws density_floor when f(x) < 1e-8.
std::vector<double> dr_variance(const Dataset& dataset, TargetOutcome target, const Curve& curve,
                                const PropensityFit& pfit, const OutcomeFit& ofit,
                                KernelSpec kernel, double h, const DensityFn& density);

inline constexpr double kDensityFloor = 1e-8;

struct Band {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// value +/- z_{(1+level)/2} sqrt(variance); no bias correction.
Band confidence_band(std::span<const double> values, std::span<const double> variance,
                     double level);
Band confidence_band(const Curve& curve, double level);
void attach_confidence_band(EffectCurve& effect, double level);

double normal_quantile(double p);

}  // namespace rdmc
