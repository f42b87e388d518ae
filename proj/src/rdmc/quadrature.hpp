// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace rdmc {

/// Linear interpolation of tabulated (grid, values); grid strictly increasing.
/// Throws domain when x falls outside the grid.
double interpolate_linear(std::span<const double> grid, std::span<const double> values, double x);

/// Integral over [lo, hi] of the piecewise-linear interpolant of (grid, values):
/// the composite trapezoid rule on the grid, with partial cells at lo and hi
/// closed by interpolating the integrand. Requires grid.front() <= lo <= hi <= grid.back().
double integrate_piecewise_linear(std::span<const double> grid, std::span<const double> values,
                                  double lo, double hi);

}  // namespace rdmc
