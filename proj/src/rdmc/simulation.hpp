// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdmc/inference.hpp"
#include "rdmc/llr.hpp"

namespace rdmc {

enum class XDistribution { normal, lognormal };

std::string to_string(XDistribution dist);
std::optional<XDistribution> parse_x_distribution(std::string_view name);

/// Two-group design with two covariates W = eta0 + eta1 x + xi, a logit
/// group model in (1, x, w1, w2) and quadratic potential outcomes in
/// (1, x, x^2, w1, w2).
struct SimConfig {
  std::size_t n = 2000;
  double mu_x = 4.0;
  double sigma_x = 1.7;
  std::array<double, 2> eta0{-1.5, 2.4};
  std::array<double, 2> eta1{0.6, 0.4};
  double sigma_xi = 2.0;
  std::array<double, 4> gamma{0.8, 0.5, 2.0, -0.8};
  std::array<double, 5> beta0{0.0, 16.0, -1.0, 42.0, 36.0};
  std::array<double, 5> beta1{80.0, -2.0, 2.0, 40.0, 48.0};
  double sigma_eps = 10.0;
  double c0 = 2.0;
  double c1 = 6.0;
  /// For lognormal, X is log-normal with mean mu_x and sd sigma_x.
  XDistribution x_dist = XDistribution::normal;

  /// Throws configuration on c0 >= c1 or a nonpositive scale.
  void check() const;
  Thresholds thresholds() const { return {c0, c1}; }
  /// Density of X.
  double x_density(double x) const;
  /// Pr(D = 1 | x, w) under the configured logit.
  double group_probability(double x, double w1, double w2) const;
};

/// Deterministic in (config, seed); different seeds give independent streams.
Dataset generate(const SimConfig& config, std::uint64_t seed);

/// g_j(x) = q0 + q1 x + q2 x^2, the outcome mean averaged over W given X = x.
struct TrueCurve {
  double q0 = 0.0, q1 = 0.0, q2 = 0.0;

  double operator()(double x) const { return q0 + x * (q1 + x * q2); }
};

TrueCurve true_curve(const SimConfig& config, TargetOutcome target);

struct IseResult {
  double ise = 0.0;
  std::size_t interpolated = 0;  ///< grid points without an estimate
};

/// int_lo^hi (g^ - g)^2 f dx by the trapezoid rule on the curve grid. Missing
/// estimates are filled by linear interpolation between the nearest
/// estimated neighbours. Throws unreliable_ise when more than 20% are missing.
IseResult integrated_squared_error(const Curve& curve, const std::function<double(double)>& truth,
                                   const DensityFn& density, double lo, double hi);

inline constexpr double kMaxMissingFraction = 0.2;

/// One estimator/nuisance combination of the benchmark.
struct BenchmarkCell {
  EstimatorMethod method;
  TargetOutcome target;
  bool propensity_wrong = false;  ///< group model without w1
  bool outcome_wrong = false;     ///< outcome model without x^2

  std::string estimator_label() const;
  /// "-" for naive, otherwise which nuisance models are misspecified.
  std::string nuisance_label() const;
};

std::vector<BenchmarkCell> table1_cells();
std::vector<BenchmarkCell> table2_cells();
/// "table1", "table2" or "all".
std::vector<BenchmarkCell> benchmark_cells(std::string_view which);

struct BenchmarkOptions {
  KernelSpec kernel;
  std::size_t grid_points = 201;
  std::size_t bandwidth_points = 20;
  /// Skips bandwidth selection when set.
  std::optional<double> fixed_h;
};

struct CellRecord {
  BenchmarkCell cell;
  double mise = 0.0;  ///< mean ISE over successful replications; NaN when none succeeded
  std::size_t replications = 0;
  std::size_t failed = 0;
  double mean_h = 0.0;
  std::vector<double> ise;  ///< per replication, NaN when it failed
  std::vector<double> h;
  std::vector<std::string> failures;  ///< "replication r: message"
};

struct BenchmarkReport {
  SimConfig config;
  std::size_t replications = 0;
  std::uint64_t base_seed = 0;
  std::vector<CellRecord> cells;
  bool degraded = false;  ///< some cell failed in more than 10% of replications
  double runtime_seconds = 0.0;
};

/// Replication r uses generate(config, base_seed + r). Each cell selects its
/// bandwidth by LSCV, estimates on an equispaced grid over [c0, c1] and scores
/// the ISE there against the true curve weighted by the density of X.
BenchmarkReport run_benchmark(const SimConfig& config, std::size_t replications,
                              std::uint64_t base_seed, const std::vector<BenchmarkCell>& cells,
                              const BenchmarkOptions& options = {});

}  // namespace rdmc
