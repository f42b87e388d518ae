// SPDX-License-Identifier: Apache-2.0
#include "rdmc/llr.hpp"

#include <algorithm>
#include <sstream>

#include "rdmc/parallel.hpp"

namespace rdmc {

EstimatorMethod EstimatorMethod::ipw(std::optional<int> group) {
  if (group && *group != 0 && *group != 1) {
    throw Error(ErrorCode::configuration, "ipw group must be 0 or 1");
  }
  return {Kind::ipw, group};
}

int EstimatorMethod::resolved_ipw_group(TargetOutcome target) const {
  if (ipw_group) return *ipw_group;
  return target.j() == 0 ? 1 : 0;
}

std::string EstimatorMethod::label() const {
  switch (kind) {
    case Kind::naive: return "naive";
    case Kind::dr: return "dr";
    case Kind::ipw:
      return ipw_group ? "ipw(d=" + std::to_string(*ipw_group) + ")" : "ipw";
  }
  return "?";
}

std::optional<EstimatorMethod::Kind> parse_method_kind(std::string_view name) {
  if (name == "naive") return EstimatorMethod::Kind::naive;
  if (name == "ipw") return EstimatorMethod::Kind::ipw;
  if (name == "dr") return EstimatorMethod::Kind::dr;
  return std::nullopt;
}

namespace {

struct Accumulated {
  NormalEquations ne;
  bool has_support = false;
  bool distinct = false;
  double first_x = 0.0;
};

template <class Samples>
Accumulated accumulate(const Samples& samples, double x0, double h, KernelSpec kernel,
                       std::size_t exclude_unit) {
  Accumulated acc;
  for (const auto& s : samples) {
    if (s.unit == exclude_unit && exclude_unit != kNoUnit) continue;
    const double d = s.x - x0;
    const double k = scaled_kernel_weight(kernel, d, h) * s.weight;
    if (k <= 0.0) continue;
    if (!acc.has_support) {
      acc.has_support = true;
      acc.first_x = s.x;
    } else if (s.x != acc.first_x) {
      acc.distinct = true;
    }
    const double kd = k * d;
    acc.ne.s0 += k;
    acc.ne.s1 += kd;
    acc.ne.s2 += kd * d;
    acc.ne.t0 += k * s.y;
    acc.ne.t1 += kd * s.y;
  }
  return acc;
}

std::string at_point(double x0) {
  std::ostringstream os;
  os.precision(17);
  os << "x0 = " << x0;
  return os.str();
}

LocalFit solve(const Accumulated& acc, double x0, double h) {
  if (!acc.distinct) {
    throw Error(ErrorCode::insufficient_support,
                "fewer than two distinct in-support points at " + at_point(x0));
  }
  // Work in u = (x - x0) / h so the condition number does not depend on h.
  const auto& ne = acc.ne;
  const double a = ne.s0;
  const double b = ne.s1 / h;
  const double c = ne.s2 / (h * h);
  const double r0 = ne.t0;
  const double r1 = ne.t1 / h;
  const double det = a * c - b * b;
  const double lmax = 0.5 * (a + c) + std::hypot(0.5 * (a - c), b);
  const double lmin = det / lmax;
  if (!(lmin > 0.0) || lmax / lmin > kMaxConditionNumber) {
    throw Error(ErrorCode::conditioning, "ill-conditioned local linear system at " + at_point(x0));
  }
  const double beta0 = (c * r0 - b * r1) / det;
  const double beta1 = (a * r1 - b * r0) / det;
  return {beta0, beta1 / h};
}

void check_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::domain, "bandwidth must be positive and finite");
  }
}

}  // namespace

NormalEquations accumulate_normal_equations(std::span<const WeightedSample> samples, double x0,
                                            double h, KernelSpec kernel) {
  check_bandwidth(h);
  return accumulate(samples, x0, h, kernel, kNoUnit).ne;
}

LocalFit local_linear_solve(std::span<const WeightedSample> samples, double x0, double h,
                            KernelSpec kernel) {
  check_bandwidth(h);
  return solve(accumulate(samples, x0, h, kernel, kNoUnit), x0, h);
}

double pseudo_outcome(const UnitRecord& unit, TargetOutcome target, const PropensityFit& pfit,
                      const OutcomeFit& ofit, const Thresholds& thresholds) {
  if (!target.in_range(unit.x, thresholds)) {
    throw Error(ErrorCode::domain, "unit outside the estimation range of g" +
                                       std::to_string(target.j()) + " at " + at_point(unit.x));
  }
  const double delta = predict_outcome(ofit, unit.x, unit.w);
  if (!target.observed(unit)) return delta;
  const double pi = predict_propensity(pfit, unit.x, unit.w);
  const double p = unit.d == 1 ? pi : 1.0 - pi;
  const double ratio = 1.0 / p;
  return ratio * unit.y - (ratio - 1.0) * delta;
}

LocalLinearEstimator LocalLinearEstimator::build(const Dataset& dataset, TargetOutcome target,
                                                 const EstimatorMethod& method,
                                                 const PropensityFit* pfit, const OutcomeFit* ofit,
                                                 KernelSpec kernel) {
  LocalLinearEstimator est;
  est.target_ = target;
  est.kernel_ = kernel;
  const auto& t = dataset.thresholds;

  switch (method.kind) {
    case EstimatorMethod::Kind::dr:
      if (!pfit || !ofit) {
        throw Error(ErrorCode::configuration,
                    "doubly robust estimation needs both a propensity and an outcome fit");
      }
      if (ofit->target != target) {
        throw Error(ErrorCode::configuration, "outcome fit targets Y" +
                                                  std::to_string(ofit->target.j()) +
                                                  " but the estimand is g" +
                                                  std::to_string(target.j()));
      }
      for (std::size_t i = 0; i < dataset.units.size(); ++i) {
        const auto& u = dataset.units[i];
        if (!target.in_range(u.x, t)) continue;
        est.samples_.push_back({u.x, pseudo_outcome(u, target, *pfit, *ofit, t), 1.0, i});
      }
      break;
    case EstimatorMethod::Kind::ipw: {
      if (!pfit) {
        throw Error(ErrorCode::configuration, "IPW estimation needs a propensity fit");
      }
      const int group = method.resolved_ipw_group(target);
      for (std::size_t i = 0; i < dataset.units.size(); ++i) {
        const auto& u = dataset.units[i];
        if (!target.in_range(u.x, t) || !target.observed(u) || u.d != group) continue;
        const double pi = predict_propensity(*pfit, u.x, u.w);
        const double p = group == 1 ? pi : 1.0 - pi;
        est.samples_.push_back({u.x, u.y, 1.0 / p, i});
      }
      break;
    }
    case EstimatorMethod::Kind::naive:
      for (std::size_t i = 0; i < dataset.units.size(); ++i) {
        const auto& u = dataset.units[i];
        if (!target.in_range(u.x, t) || !target.observed(u)) continue;
        est.samples_.push_back({u.x, u.y, 1.0, i});
      }
      break;
  }
  std::stable_sort(est.samples_.begin(), est.samples_.end(),
                   [](const WeightedSample& a, const WeightedSample& b) { return a.x < b.x; });
  return est;
}

std::span<const WeightedSample> LocalLinearEstimator::window(double x0, double h) const {
  const auto support = kernel_support(kernel_);
  if (!support) return samples_;
  // Slightly wider than the support; the kernel itself zeroes anything outside.
  const double radius = h * *support * (1.0 + 1e-12);
  auto lo = std::lower_bound(samples_.begin(), samples_.end(), x0 - radius,
                             [](const WeightedSample& s, double v) { return s.x < v; });
  auto hi = std::upper_bound(lo, samples_.end(), x0 + radius,
                             [](double v, const WeightedSample& s) { return v < s.x; });
  return {lo, hi};
}

LocalFit LocalLinearEstimator::fit_at(double x0, double h, std::size_t exclude_unit) const {
  check_bandwidth(h);
  return solve(accumulate(window(x0, h), x0, h, kernel_, exclude_unit), x0, h);
}

NormalEquations LocalLinearEstimator::normal_equations_at(double x0, double h) const {
  check_bandwidth(h);
  return accumulate(window(x0, h), x0, h, kernel_, kNoUnit).ne;
}

std::vector<double> default_grid(const Thresholds& thresholds, std::size_t points) {
  if (points < 2) {
    throw Error(ErrorCode::configuration, "grid needs at least two points");
  }
  std::vector<double> grid(points);
  const double step = (thresholds.c1 - thresholds.c0) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = thresholds.c0 + step * static_cast<double>(k);
  }
  grid.back() = thresholds.c1;
  return grid;
}

Curve estimate_curve(const Dataset& dataset, TargetOutcome target, const EstimatorMethod& method,
                     double h, const PropensityFit* pfit, const OutcomeFit* ofit,
                     std::span<const double> grid, KernelSpec kernel) {
  check_bandwidth(h);
  if (grid.empty()) {
    throw Error(ErrorCode::configuration, "evaluation grid is empty");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw Error(ErrorCode::configuration, "evaluation grid must be strictly increasing");
    }
  }
  if (dataset.units.empty()) {
    throw Error(ErrorCode::sample_size, "dataset is empty");
  }
  const auto [min_it, max_it] = std::minmax_element(
      dataset.units.begin(), dataset.units.end(),
      [](const UnitRecord& a, const UnitRecord& b) { return a.x < b.x; });
  const double lo = target.j() == 0 ? min_it->x : dataset.thresholds.c0;
  const double hi = target.j() == 0 ? dataset.thresholds.c1 : max_it->x;
  if (grid.front() < lo || grid.back() > hi) {
    std::ostringstream os;
    os << "grid [" << grid.front() << ", " << grid.back() << "] leaves the range [" << lo << ", "
       << hi << "] where g" << target.j() << " is estimable";
    throw Error(ErrorCode::domain, os.str());
  }

  const auto est = LocalLinearEstimator::build(dataset, target, method, pfit, ofit, kernel);

  Curve curve;
  curve.grid.assign(grid.begin(), grid.end());
  curve.values.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  curve.slopes.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  curve.target = target;
  curve.bandwidth = h;
  curve.method = method;
  curve.kernel = kernel;
  curve.thresholds = dataset.thresholds;

  std::vector<std::optional<PointFailure>> failed(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    try {
      const auto fit = est.fit_at(grid[k], h);
      curve.values[k] = fit.alpha0;
      curve.slopes[k] = fit.alpha1;
    } catch (const Error& e) {
      failed[k] = PointFailure{k, grid[k], e.code(), e.what()};
    }
  });
  for (auto& f : failed) {
    if (f) curve.failures.push_back(std::move(*f));
  }
  return curve;
}

double loo_estimate(const Dataset& dataset, TargetOutcome target, const EstimatorMethod& method,
                    double h, const PropensityFit* pfit, const OutcomeFit* ofit, std::size_t i,
                    KernelSpec kernel) {
  if (i >= dataset.units.size()) {
    throw Error(ErrorCode::domain, "unit index out of range");
  }
  const auto& u = dataset.units[i];
  if (!target.observed(u) || !target.in_range(u.x, dataset.thresholds)) {
    throw Error(ErrorCode::domain, "unit " + std::to_string(i) +
                                       " has no observed Y" + std::to_string(target.j()) +
                                       " inside the estimation range");
  }
  const auto est = LocalLinearEstimator::build(dataset, target, method, pfit, ofit, kernel);
  return est.fit_at(u.x, h, i).alpha0;
}

}  // namespace rdmc
