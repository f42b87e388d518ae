// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rdmc/inference.hpp"
#include "rdmc/llr.hpp"

namespace rdmc {

/// Marginal cost of treating one unit at x: a constant or a linearly
/// interpolated table.
struct CostSpec {
  enum class Kind { constant, tabulated };

  Kind kind = Kind::constant;
  double value = 0.0;
  std::vector<double> table_x;
  std::vector<double> table_mc;

  static CostSpec constant(double mc) { return {Kind::constant, mc, {}, {}}; }
  /// Throws configuration unless x is strictly increasing and sizes match.
  static CostSpec tabulated(std::vector<double> x, std::vector<double> mc);

  double at(double x) const;
  /// Throws configuration when a table does not cover [t.c0, t.c1].
  void check_covers(const Thresholds& t) const;
};

/// Expected outcome net of treatment cost when everyone in [c0, c1] above c is
/// treated:
///   int_{c0}^{c} g0 f dx + int_{c}^{c1} g1 f dx - int_{c}^{c1} MC f dx.
/// Integrals use the trapezoid rule on each curve's grid.
double net_benefit(double c, const Curve& g0, const Curve& g1, const DensityFn& density,
                   const CostSpec& cost);

enum class BoundaryFlag { interior, at_c0, at_c1 };

std::string to_string(BoundaryFlag flag);

struct ThresholdResult {
  double c_opt = 0.0;
  double objective_at_opt = 0.0;
  std::vector<std::pair<double, double>> objective_profile;
  BoundaryFlag boundary = BoundaryFlag::interior;
};

/// Grid search of net_benefit over `resolution` equispaced points of
/// [c0, c1]; ties go to the smaller c.
ThresholdResult optimize_threshold(const Curve& g0, const Curve& g1, const DensityFn& density,
                                   const CostSpec& cost, std::size_t resolution = 1001);

}  // namespace rdmc
