// SPDX-License-Identifier: Apache-2.0
#include "rdmc/quadrature.hpp"

#include <algorithm>
#include <sstream>

#include "rdmc/error.hpp"

namespace rdmc {

namespace {

void check_inside(std::span<const double> grid, double x) {
  if (grid.empty() || x < grid.front() || x > grid.back()) {
    std::ostringstream os;
    os << "point " << x << " lies outside the tabulated range";
    if (!grid.empty()) os << " [" << grid.front() << ", " << grid.back() << "]";
    throw Error(ErrorCode::domain, os.str());
  }
}

// Index k with grid[k] <= x <= grid[k + 1].
std::size_t cell_of(std::span<const double> grid, double x) {
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  std::size_t k = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
  return std::min(k, grid.size() - 2);
}

}  // namespace

double interpolate_linear(std::span<const double> grid, std::span<const double> values,
                          double x) {
  check_inside(grid, x);
  if (grid.size() == 1) return values[0];
  const std::size_t k = cell_of(grid, x);
  const double t = (x - grid[k]) / (grid[k + 1] - grid[k]);
  if (t == 0.0) return values[k];
  if (t == 1.0) return values[k + 1];
  return values[k] + t * (values[k + 1] - values[k]);
}

double integrate_piecewise_linear(std::span<const double> grid, std::span<const double> values,
                                  double lo, double hi) {
  check_inside(grid, lo);
  check_inside(grid, hi);
  if (hi < lo) {
    throw Error(ErrorCode::domain, "integration bounds are reversed");
  }
  if (hi == lo || grid.size() < 2) return 0.0;
  const std::size_t klo = cell_of(grid, lo);
  const std::size_t khi = cell_of(grid, hi);
  const double vlo = interpolate_linear(grid, values, lo);
  const double vhi = interpolate_linear(grid, values, hi);
  if (klo == khi) return 0.5 * (vlo + vhi) * (hi - lo);

  double sum = 0.5 * (vlo + values[klo + 1]) * (grid[klo + 1] - lo);
  for (std::size_t k = klo + 1; k < khi; ++k) {
    sum += 0.5 * (values[k] + values[k + 1]) * (grid[k + 1] - grid[k]);
  }
  sum += 0.5 * (values[khi] + vhi) * (hi - grid[khi]);
  return sum;
}

}  // namespace rdmc
