// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rdmc/error.hpp"
#include "rdmc/simulation.hpp"
#include "rdmc/threshold.hpp"

namespace rdmc {
namespace {

const Thresholds kT{2.0, 6.0};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an rdmc::Error";
  return ErrorCode::io;
}

Curve tabulated(int j, const std::vector<double>& grid, const std::function<double(double)>& g) {
  Curve c;
  c.grid = grid;
  for (double x : grid) {
    c.values.push_back(g(x));
    c.slopes.push_back(0.0);
  }
  c.target = TargetOutcome(j);
  c.bandwidth = 1.0;
  c.method = EstimatorMethod::dr();
  c.thresholds = kT;
  return c;
}

const DensityFn kUniform = [](double) { return 0.25; };

/// Trapezoid integral of f over [a, b] on the nodes of `grid` inside it.
double trapezoid_on(const std::vector<double>& grid, const std::function<double(double)>& f,
                    double a, double b) {
  double s = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k - 1] >= a && grid[k] <= b) s += 0.5 * (grid[k] - grid[k - 1]) * (f(grid[k - 1]) + f(grid[k]));
  }
  return s;
}

TEST(NetBenefit, AtUpperThresholdIsTheUntreatedIntegral) {
  const auto grid = default_grid(kT, 81);
  const auto g0f = [](double x) { return 100 + 3 * x - x * x; };
  const auto c0 = tabulated(0, grid, g0f);
  const auto c1 = tabulated(1, grid, [](double x) { return 400 + x; });
  const NormalDensity f{4.0, 1.7};
  const double nb = net_benefit(6.0, c0, c1, f, CostSpec::constant(50.0));
  const double ref = trapezoid_on(grid, [&](double x) { return g0f(x) * f(x); }, 2.0, 6.0);
  EXPECT_NEAR(nb, ref, 1e-10 * std::fabs(ref));
}

TEST(NetBenefit, ZeroCurvesAndCost) {
  const auto grid = default_grid(kT, 11);
  const auto z0 = tabulated(0, grid, [](double) { return 0.0; });
  const auto z1 = tabulated(1, grid, [](double) { return 0.0; });
  for (double c : {2.0, 3.3, 6.0}) EXPECT_EQ(net_benefit(c, z0, z1, kUniform, CostSpec::constant(0.0)), 0.0);
}

TEST(NetBenefit, UniformDensityHandIntegral) {
  const auto grid = default_grid(kT, 11);
  const auto a = tabulated(0, grid, [](double) { return 1.0; });
  const auto b = tabulated(1, grid, [](double) { return 3.0; });
  EXPECT_NEAR(net_benefit(4.0, a, b, kUniform, CostSpec::constant(0.0)), 2.0, 1e-14);
  // Partial cell: c between grid nodes.
  EXPECT_NEAR(net_benefit(4.13, a, b, kUniform, CostSpec::constant(0.0)),
              1.0 * 0.25 * 2.13 + 3.0 * 0.25 * 1.87, 1e-14);
  EXPECT_NEAR(net_benefit(4.0, a, b, kUniform, CostSpec::constant(1.0)), 2.0 - 0.5, 1e-14);
}

TEST(NetBenefit, DomainAndCoverageErrors) {
  const auto grid = default_grid(kT, 11);
  const auto a = tabulated(0, grid, [](double) { return 1.0; });
  const auto b = tabulated(1, grid, [](double) { return 3.0; });
  EXPECT_EQ(code_of([&] { net_benefit(1.9, a, b, kUniform, CostSpec::constant(0)); }), ErrorCode::domain);
  EXPECT_EQ(code_of([&] { net_benefit(6.1, a, b, kUniform, CostSpec::constant(0)); }), ErrorCode::domain);
  const auto shortc = tabulated(1, default_grid({2.5, 6.0}, 11), [](double) { return 3.0; });
  EXPECT_EQ(code_of([&] { net_benefit(4.0, a, shortc, kUniform, CostSpec::constant(0)); }),
            ErrorCode::alignment);
  auto holes = b;
  holes.values[5] = std::nan("");
  EXPECT_EQ(code_of([&] { net_benefit(4.0, a, holes, kUniform, CostSpec::constant(0)); }),
            ErrorCode::alignment);
}

TEST(CostSpec, TabulatedInterpolationAndCoverage) {
  const auto cost = CostSpec::tabulated({1.0, 3.0, 7.0}, {10.0, 30.0, 30.0});
  EXPECT_DOUBLE_EQ(cost.at(2.0), 20.0);
  EXPECT_DOUBLE_EQ(cost.at(5.0), 30.0);
  EXPECT_NO_THROW(cost.check_covers(kT));
  const auto narrow = CostSpec::tabulated({3.0, 7.0}, {1.0, 1.0});
  EXPECT_EQ(code_of([&] { narrow.check_covers(kT); }), ErrorCode::configuration);
  EXPECT_EQ(code_of([&] { CostSpec::tabulated({1.0, 1.0}, {1.0, 2.0}); }), ErrorCode::configuration);
  EXPECT_EQ(code_of([&] { CostSpec::tabulated({1.0, 2.0}, {1.0}); }), ErrorCode::configuration);

  const auto grid = default_grid(kT, 41);
  const auto a = tabulated(0, grid, [](double) { return 0.0; });
  const auto b = tabulated(1, grid, [](double) { return 0.0; });
  // int_4^6 MC(x) f dx with MC linear 20..30 on [2,3] then flat 30 -> 30 * 0.5.
  EXPECT_NEAR(net_benefit(4.0, a, b, kUniform, cost), -15.0, 1e-12);
}

TEST(OptimizeThreshold, EffectBelowCostEverywhereTreatsNobody) {
  // The objective's derivative in c is (MC - tau) f, so it increases and the
  // maximum sits at c1, where nobody between the thresholds is treated.
  const auto grid = default_grid(kT, 201);
  const auto a = tabulated(0, grid, [](double x) { return 10 * x; });
  const auto b = tabulated(1, grid, [](double x) { return 10 * x + 5; });
  const auto r = optimize_threshold(a, b, NormalDensity{4.0, 1.7}, CostSpec::constant(8.0));
  EXPECT_EQ(r.c_opt, 6.0);
  EXPECT_EQ(r.boundary, BoundaryFlag::at_c1);
}

TEST(OptimizeThreshold, EffectAboveCostEverywhereTreatsEveryone) {
  const auto grid = default_grid(kT, 201);
  const auto a = tabulated(0, grid, [](double x) { return 10 * x; });
  const auto b = tabulated(1, grid, [](double x) { return 10 * x + 5; });
  const auto r = optimize_threshold(a, b, NormalDensity{4.0, 1.7}, CostSpec::constant(2.0));
  EXPECT_EQ(r.c_opt, 2.0);
  EXPECT_EQ(r.boundary, BoundaryFlag::at_c0);
}

TEST(OptimizeThreshold, TiesGoToTheSmallerThreshold) {
  const auto grid = default_grid(kT, 21);
  const auto a = tabulated(0, grid, [](double) { return 7.0; });
  const auto b = tabulated(1, grid, [](double) { return 7.0; });
  const auto r = optimize_threshold(a, b, kUniform, CostSpec::constant(0.0), 11);
  EXPECT_EQ(r.c_opt, 2.0);
  ASSERT_EQ(r.objective_profile.size(), 11u);
  double best = -1e300;
  for (const auto& [c, v] : r.objective_profile) best = std::max(best, v);
  EXPECT_NEAR(r.objective_at_opt, best, 1e-12 * std::fabs(best));
}

struct TrueSetup {
  Curve g0, g1;
  TrueCurve t0, t1;
  NormalDensity f{4.0, 1.7};
};

TrueSetup true_setup(std::size_t points) {
  SimConfig cfg;
  TrueSetup s;
  s.t0 = true_curve(cfg, TargetOutcome(0));
  s.t1 = true_curve(cfg, TargetOutcome(1));
  const auto grid = default_grid(kT, points);
  s.g0 = tabulated(0, grid, s.t0);
  s.g1 = tabulated(1, grid, s.t1);
  return s;
}

TEST(OptimizeThreshold, MatchesBruteForceOnTrueCurves) {
  const auto s = true_setup(2001);
  const auto r = optimize_threshold(s.g0, s.g1, s.f, CostSpec::constant(100.0));
  // Brute force: objective on 1e5 points by cumulative trapezoid sums of the
  // closed-form integrands.
  const int n = 100000;
  const double step = 4.0 / (n - 1);
  auto h0 = [&](double x) { return s.t0(x) * s.f(x); };
  auto h1 = [&](double x) { return (s.t1(x) - 100.0) * s.f(x); };
  std::vector<double> left(n, 0.0), right(n, 0.0);
  for (int k = 1; k < n; ++k) {
    const double x0 = 2.0 + (k - 1) * step, x1 = 2.0 + k * step;
    left[k] = left[k - 1] + 0.5 * step * (h0(x0) + h0(x1));
  }
  for (int k = n - 2; k >= 0; --k) {
    const double x0 = 2.0 + k * step, x1 = 2.0 + (k + 1) * step;
    right[k] = right[k + 1] + 0.5 * step * (h1(x0) + h1(x1));
  }
  int best = 0;
  for (int k = 1; k < n; ++k) {
    if (left[k] + right[k] > left[best] + right[best]) best = k;
  }
  const double brute = 2.0 + best * step;
  EXPECT_LE(std::fabs(r.c_opt - brute), 4.0 / 1000.0);
  EXPECT_EQ(r.boundary, BoundaryFlag::interior);
  // tau(c) = 100 at the larger root of 3c^2 - 14.4c + 11.8.
  EXPECT_NEAR(brute, (14.4 + std::sqrt(14.4 * 14.4 - 12 * 11.8)) / 6.0, 1e-3);
}

TEST(OptimizeThreshold, FullLineObjectiveHasTheSameArgmax) {
  // Benefits below c0 and above c1 do not depend on c.
  const auto s = true_setup(2001);
  const auto r = optimize_threshold(s.g0, s.g1, s.f, CostSpec::constant(100.0));
  auto full = [&](double c) {
    const auto g0f = [&](double x) { return s.t0(x) * s.f(x); };
    const auto g1f = [&](double x) { return s.t1(x) * s.f(x); };
    const auto mcf = [&](double x) { return 100.0 * s.f(x); };
    return testing::simpson(g0f, -16.0, c, 20000) + testing::simpson(g1f, c, 24.0, 20000) -
           testing::simpson(mcf, c, 6.0, 2000);
  };
  double best_c = 2.0, best = -1e300;
  for (int k = 0; k <= 1000; ++k) {
    const double c = 2.0 + 0.004 * k;
    const double v = full(c);
    if (v > best) {
      best = v;
      best_c = c;
    }
  }
  EXPECT_LE(std::fabs(best_c - r.c_opt), 0.004 + 1e-12);
}

TEST(OptimizeThreshold, ForwardDifferenceSign) {
  const auto s = true_setup(401);
  const CostSpec cost = CostSpec::constant(100.0);
  const auto r = optimize_threshold(s.g0, s.g1, s.f, cost, 401);
  for (std::size_t k = 0; k + 1 < r.objective_profile.size(); ++k) {
    const double c = r.objective_profile[k].first;
    const double diff = r.objective_profile[k + 1].second - r.objective_profile[k].second;
    const double slope = (cost.at(c) - (s.t1(c) - s.t0(c))) * s.f(c);
    if (std::fabs(slope) < 0.05) continue;  // too close to the crossing to resolve
    EXPECT_EQ(diff > 0, slope > 0) << "c=" << c;
  }
}

TEST(OptimizeThreshold, RaisingCostNeverLowersAnUpperBoundarySolution) {
  const auto s = true_setup(401);
  const auto base = optimize_threshold(s.g0, s.g1, s.f, CostSpec::constant(140.0));
  ASSERT_EQ(base.boundary, BoundaryFlag::at_c1);
  const auto more = optimize_threshold(s.g0, s.g1, s.f, CostSpec::constant(150.0));
  EXPECT_EQ(more.c_opt, base.c_opt);
  EXPECT_LE(more.objective_at_opt, base.objective_at_opt);
  const auto mid = optimize_threshold(s.g0, s.g1, s.f, CostSpec::constant(100.0));
  const auto mid2 = optimize_threshold(s.g0, s.g1, s.f, CostSpec::constant(101.0));
  EXPECT_LE(mid2.objective_at_opt, mid.objective_at_opt);
}

TEST(OptimizeThreshold, RefinementConsistency) {
  const auto s = true_setup(2001);
  for (double mc : {95.0, 100.0, 103.0}) {
    const auto a = optimize_threshold(s.g0, s.g1, s.f, CostSpec::constant(mc), 1001);
    const auto b = optimize_threshold(s.g0, s.g1, s.f, CostSpec::constant(mc), 2001);
    EXPECT_LE(std::fabs(a.c_opt - b.c_opt), 4.0 / 1000.0 + 1e-12);
  }
}

TEST(OptimizeThreshold, BoundaryFlagNames) {
  EXPECT_EQ(to_string(BoundaryFlag::interior), "interior");
  EXPECT_EQ(to_string(BoundaryFlag::at_c0), "at_c0");
  EXPECT_EQ(to_string(BoundaryFlag::at_c1), "at_c1");
}

}  // namespace
}  // namespace rdmc
