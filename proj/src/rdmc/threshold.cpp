// SPDX-License-Identifier: Apache-2.0
#include "rdmc/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rdmc/parallel.hpp"
#include "rdmc/quadrature.hpp"

namespace rdmc {

namespace {

// Tabulated integrands over the part of a curve's grid inside [c0, c1].
struct Integrand {
  std::vector<double> grid;
  std::vector<double> values;
};

void check_curve(const Curve& curve, const Thresholds& t, const char* name) {
  if (curve.grid.empty() || curve.grid.front() > t.c0 || curve.grid.back() < t.c1) {
    std::ostringstream os;
    os << name << " grid does not cover [" << t.c0 << ", " << t.c1 << "]";
    throw Error(ErrorCode::alignment, os.str());
  }
}

// Restricts to the smallest run of grid points that still brackets [c0, c1]
// and tabulates fn(x, value) there.
template <typename Fn>
Integrand tabulate(const Curve& curve, const Thresholds& t, const char* name, Fn fn) {
  check_curve(curve, t, name);
  const auto first = std::upper_bound(curve.grid.begin(), curve.grid.end(), t.c0) - 1;
  const auto last = std::lower_bound(curve.grid.begin(), curve.grid.end(), t.c1);
  Integrand out;
  for (auto it = first; it <= last; ++it) {
    const auto k = static_cast<std::size_t>(it - curve.grid.begin());
    if (!curve.has_value(k)) {
      std::ostringstream os;
      os << name << " has no estimate at x = " << curve.grid[k] << " inside [" << t.c0 << ", "
         << t.c1 << "]";
      throw Error(ErrorCode::alignment, os.str());
    }
    out.grid.push_back(curve.grid[k]);
    out.values.push_back(fn(curve.grid[k], curve.values[k]));
  }
  return out;
}

struct Objective {
  Thresholds t;
  Integrand untreated;  // g0 f
  Integrand treated;    // (g1 - MC) f

  double operator()(double c) const {
    if (!(c >= t.c0 && c <= t.c1)) {
      std::ostringstream os;
      os << "threshold " << c << " outside [" << t.c0 << ", " << t.c1 << "]";
      throw Error(ErrorCode::domain, os.str());
    }
    return integrate_piecewise_linear(untreated.grid, untreated.values, t.c0, c) +
           integrate_piecewise_linear(treated.grid, treated.values, c, t.c1);
  }
};

Objective make_objective(const Curve& g0, const Curve& g1, const DensityFn& density,
                         const CostSpec& cost) {
  if (g0.target.j() != 0 || g1.target.j() != 1) {
    throw Error(ErrorCode::alignment, "net benefit needs a g0 curve and a g1 curve");
  }
  if (g0.thresholds.c0 != g1.thresholds.c0 || g0.thresholds.c1 != g1.thresholds.c1) {
    throw Error(ErrorCode::alignment, "curves come from designs with different thresholds");
  }
  const Thresholds t = g0.thresholds;
  cost.check_covers(t);
  Objective obj{t, {}, {}};
  obj.untreated = tabulate(g0, t, "g0 curve", [&](double x, double g) { return g * density(x); });
  obj.treated = tabulate(g1, t, "g1 curve",
                         [&](double x, double g) { return (g - cost.at(x)) * density(x); });
  return obj;
}

}  // namespace

CostSpec CostSpec::tabulated(std::vector<double> x, std::vector<double> mc) {
  if (x.size() != mc.size() || x.size() < 2) {
    throw Error(ErrorCode::configuration,
                "cost table needs at least two rows with one cost per x");
  }
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!(x[k] > x[k - 1])) {
      throw Error(ErrorCode::configuration, "cost table x must be strictly increasing");
    }
  }
  for (double v : mc) {
    if (!std::isfinite(v)) throw Error(ErrorCode::configuration, "cost table has a non-finite cost");
  }
  return {Kind::tabulated, 0.0, std::move(x), std::move(mc)};
}

double CostSpec::at(double x) const {
  if (kind == Kind::constant) return value;
  return interpolate_linear(table_x, table_mc, x);
}

void CostSpec::check_covers(const Thresholds& t) const {
  if (kind == Kind::constant) return;
  if (table_x.front() > t.c0 || table_x.back() < t.c1) {
    std::ostringstream os;
    os << "cost table covers [" << table_x.front() << ", " << table_x.back() << "] but must cover ["
       << t.c0 << ", " << t.c1 << "]";
    throw Error(ErrorCode::configuration, os.str());
  }
}

std::string to_string(BoundaryFlag flag) {
  switch (flag) {
    case BoundaryFlag::interior: return "interior";
    case BoundaryFlag::at_c0: return "at_c0";
    case BoundaryFlag::at_c1: return "at_c1";
  }
  return "interior";
}

double net_benefit(double c, const Curve& g0, const Curve& g1, const DensityFn& density,
                   const CostSpec& cost) {
  return make_objective(g0, g1, density, cost)(c);
}

ThresholdResult optimize_threshold(const Curve& g0, const Curve& g1, const DensityFn& density,
                                   const CostSpec& cost, std::size_t resolution) {
  if (resolution < 2) {
    throw Error(ErrorCode::configuration, "threshold search needs a resolution of at least 2");
  }
  const Objective obj = make_objective(g0, g1, density, cost);
  const auto cs = default_grid(obj.t, resolution);

  std::vector<double> values(cs.size());
  parallel_for(cs.size(), [&](std::size_t k) { values[k] = obj(cs[k]); });

  ThresholdResult result;
  // Differences at rounding level count as ties, which go to the smaller c.
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::fabs(v));
  const double tie = 1e-12 * std::max(scale, 1.0);
  std::size_t best = 0;
  for (std::size_t k = 1; k < cs.size(); ++k) {
    if (values[k] > values[best] + tie) best = k;
  }
  result.c_opt = cs[best];
  result.objective_at_opt = values[best];
  result.boundary = best == 0                ? BoundaryFlag::at_c0
                    : best + 1 == cs.size() ? BoundaryFlag::at_c1
                                             : BoundaryFlag::interior;
  result.objective_profile.reserve(cs.size());
  for (std::size_t k = 0; k < cs.size(); ++k) result.objective_profile.emplace_back(cs[k], values[k]);
  return result;
}

}  // namespace rdmc
