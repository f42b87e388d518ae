// SPDX-License-Identifier: Apache-2.0
#include "rdmc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "rdmc/parallel.hpp"

namespace rdmc {

namespace {

double quantile_sorted(const std::vector<double>& v, double p) {
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

}  // namespace

DensityEstimate DensityEstimate::fit(std::span<const double> xs) {
  DensityEstimate est;
  est.xs_.assign(xs.begin(), xs.end());
  std::sort(est.xs_.begin(), est.xs_.end());
  if (est.xs_.size() < 2 || est.xs_.front() == est.xs_.back()) {
    throw Error(ErrorCode::degenerate_sample,
                "density estimation needs at least two distinct values");
  }
  const double n = static_cast<double>(est.xs_.size());
  double mean = 0.0;
  for (double x : est.xs_) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : est.xs_) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double iqr = quantile_sorted(est.xs_, 0.75) - quantile_sorted(est.xs_, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  est.bandwidth_ = 0.9 * spread * std::pow(n, -0.2);
  return est;
}

double DensityEstimate::operator()(double x) const {
  double sum = 0.0;
  for (double xi : xs_) {
    const double u = (x - xi) / bandwidth_;
    sum += std::exp(-0.5 * u * u);
  }
  return sum * kInvSqrt2Pi / (static_cast<double>(xs_.size()) * bandwidth_);
}

double NormalDensity::operator()(double x) const {
  const double u = (x - mean) / sd;
  return std::exp(-0.5 * u * u) * kInvSqrt2Pi / sd;
}

EffectCurve effect_curve(const Curve& g0, const Curve& g1) {
  if (g0.target.j() != 0 || g1.target.j() != 1) {
    throw Error(ErrorCode::alignment, "effect curve needs a g0 curve and a g1 curve");
  }
  if (g0.thresholds.c0 != g1.thresholds.c0 || g0.thresholds.c1 != g1.thresholds.c1) {
    throw Error(ErrorCode::alignment, "curves come from designs with different thresholds");
  }
  if (g0.grid != g1.grid) {
    throw Error(ErrorCode::alignment, "g0 and g1 curves are on different grids");
  }
  const auto& t = g0.thresholds;
  for (double x : g0.grid) {
    if (!(x > t.c0 && x < t.c1)) {
      std::ostringstream os;
      os << "grid point " << x << " is outside the open interval (" << t.c0 << ", " << t.c1
         << ") where the effect is identified";
      throw Error(ErrorCode::alignment, os.str());
    }
  }
  EffectCurve out;
  out.grid = g0.grid;
  out.thresholds = t;
  out.tau.resize(out.grid.size());
  for (std::size_t k = 0; k < out.grid.size(); ++k) out.tau[k] = g1.values[k] - g0.values[k];
  if (g0.has_variance() && g1.has_variance()) {
    out.variance.resize(out.grid.size());
    for (std::size_t k = 0; k < out.grid.size(); ++k) {
      out.variance[k] = g0.variance[k] + g1.variance[k];
    }
  }
  return out;
}

Curve restrict_to_open_interval(const Curve& curve, double lo, double hi) {
  Curve out = curve;
  out.grid.clear();
  out.values.clear();
  out.slopes.clear();
  out.variance.clear();
  out.failures.clear();
  for (std::size_t k = 0; k < curve.size(); ++k) {
    if (!(curve.grid[k] > lo && curve.grid[k] < hi)) continue;
    out.grid.push_back(curve.grid[k]);
    out.values.push_back(curve.values[k]);
    out.slopes.push_back(curve.slopes[k]);
    if (curve.has_variance()) out.variance.push_back(curve.variance[k]);
  }
  for (const auto& f : curve.failures) {
    if (!(f.x > lo && f.x < hi)) continue;
    auto copy = f;
    copy.index = static_cast<std::size_t>(
        std::lower_bound(out.grid.begin(), out.grid.end(), f.x) - out.grid.begin());
    out.failures.push_back(std::move(copy));
  }
  return out;
}

std::vector<double> dr_variance(const Dataset& dataset, TargetOutcome target, const Curve& curve,
                                const PropensityFit& pfit, const OutcomeFit& ofit,
                                KernelSpec kernel, double h, const DensityFn& density) {
  if (curve.method.kind != EstimatorMethod::Kind::dr) {
    throw Error(ErrorCode::configuration, "plug-in variance applies to doubly robust curves");
  }
  if (curve.bandwidth != h || curve.target != target || curve.kernel != kernel) {
    throw Error(ErrorCode::configuration,
                "variance bandwidth, kernel and target must match the curve");
  }
  const auto est =
      LocalLinearEstimator::build(dataset, target, EstimatorMethod::dr(), &pfit, &ofit, kernel);
  const auto samples = est.samples();

  // Influence terms only matter where some grid point gives them kernel weight.
  const auto support = kernel_support(kernel);
  const double reach = support ? *support * h * (1.0 + 1e-12) : 0.0;
  const double lo = curve.grid.front() - reach;
  const double hi = curve.grid.back() + reach;

  std::vector<double> psi_sq(samples.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto& s = samples[i];
    if (support && (s.x < lo || s.x > hi)) return;
    try {
      const double psi = s.y - est.fit_at(s.x, h).alpha0;
      psi_sq[i] = psi * psi;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::insufficient_support && e.code() != ErrorCode::conditioning) {
        throw;
      }
    }
  });

  const double roughness = kernel_constants(kernel).r;
  const double nh = static_cast<double>(dataset.size()) * h;
  std::vector<double> var(curve.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < curve.size(); ++k) {
    if (!curve.has_value(k)) continue;
    const double x = curve.grid[k];
    double wsum = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (std::isnan(psi_sq[i])) continue;
      const double w = scaled_kernel_weight(kernel, samples[i].x - x, h);
      wsum += w;
      m2 += w * psi_sq[i];
    }
    if (!(wsum > 0.0)) continue;
    m2 /= wsum;
    const double f = density(x);
    if (!(f >= kDensityFloor)) {
      std::ostringstream os;
      os << "density estimate " << f << " below floor " << kDensityFloor << " at x = " << x;
      throw Error(ErrorCode::density_floor, os.str());
    }
    var[k] = roughness / f * m2 / nh;
  }
  return var;
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

Band confidence_band(std::span<const double> values, std::span<const double> variance,
                     double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::configuration, "confidence level must lie in (0, 1)");
  }
  if (variance.size() != values.size()) {
    throw Error(ErrorCode::configuration, "confidence band needs a variance for every point");
  }
  const double z = normal_quantile(0.5 * (1.0 + level));
  Band band;
  band.lower.resize(values.size());
  band.upper.resize(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double half = z * std::sqrt(variance[k]);
    band.lower[k] = values[k] - half;
    band.upper[k] = values[k] + half;
  }
  return band;
}

Band confidence_band(const Curve& curve, double level) {
  if (!curve.has_variance()) {
    throw Error(ErrorCode::configuration, "curve carries no variance");
  }
  return confidence_band(curve.values, curve.variance, level);
}

void attach_confidence_band(EffectCurve& effect, double level) {
  if (!effect.has_variance()) {
    throw Error(ErrorCode::configuration, "effect curve carries no variance");
  }
  auto band = confidence_band(effect.tau, effect.variance, level);
  effect.ci_lower = std::move(band.lower);
  effect.ci_upper = std::move(band.upper);
  effect.level = level;
}

}  // namespace rdmc
