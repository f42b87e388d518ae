// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rdmc/llr.hpp"

namespace rdmc {

struct LscvScore {
  double score = 0.0;
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;  ///< units whose leave-one-out fit failed
};

/// Mean of (Y_i - g_{j,-i}(X_i))^2 over units with z_i = j inside the
/// estimation range (x < c1 for g0, x > c0 for g1). Throws
/// bandwidth_infeasible when every leave-one-out fit fails.
LscvScore lscv_score(const Dataset& dataset, TargetOutcome target, const EstimatorMethod& method,
                     double h, const PropensityFit* pfit, const OutcomeFit* ofit,
                     KernelSpec kernel);

/// Same score against an already built estimation sample.
LscvScore lscv_score(const LocalLinearEstimator& estimator, const Dataset& dataset, double h);

struct BandwidthSearch {
  std::vector<double> h_grid;
  bool refine = false;  ///< golden-section pass between the grid neighbours of the minimum

  /// `points` log-spaced values from 0.1 sd to 2 sd of the in-range x.
  static BandwidthSearch default_for(const Dataset& dataset, TargetOutcome target,
                                     std::size_t points = 20);
};

struct BandwidthProfileEntry {
  double h = 0.0;
  std::optional<double> score;  ///< empty when infeasible
  std::size_t n_excluded = 0;
  std::string diagnostic;
};

struct BandwidthSelection {
  double h = 0.0;
  double score = 0.0;
  bool refined = false;  ///< true when the golden-section pass improved on the grid
  std::vector<BandwidthProfileEntry> profile;
};

/// Argmin of the LSCV score over the search grid; ties go to the larger h.
BandwidthSelection select_bandwidth(const Dataset& dataset, TargetOutcome target,
                                    const EstimatorMethod& method, const BandwidthSearch& search,
                                    const PropensityFit* pfit, const OutcomeFit* ofit,
                                    KernelSpec kernel);

}  // namespace rdmc
