// SPDX-License-Identifier: Apache-2.0
// Exercises the shared library through its C header only.
#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "rdmc/rdmc.h"

namespace {

namespace fs = std::filesystem;

rdmc_sim_config small_config(size_t n) {
  rdmc_sim_config cfg;
  rdmc_sim_config_default(&cfg);
  cfg.n = n;
  return cfg;
}

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(rdmc_version(), "");
  EXPECT_STREQ(rdmc_status_name(RDMC_OK), "ok");
  EXPECT_STREQ(rdmc_status_name(RDMC_E_SEPARATION), "separation");
  EXPECT_STREQ(rdmc_status_name(RDMC_E_ALIGNMENT), "alignment");
}

TEST(CApi, DefaultConfigAndTrueCurves) {
  const auto cfg = small_config(100);
  EXPECT_EQ(cfg.mu_x, 4.0);
  EXPECT_EQ(cfg.c0, 2.0);
  double q0[3], q1[3];
  ASSERT_EQ(rdmc_true_curve(&cfg, 0, q0), RDMC_OK);
  ASSERT_EQ(rdmc_true_curve(&cfg, 1, q1), RDMC_OK);
  const auto at = [](const double* q, double x) { return q[0] + q[1] * x + q[2] * x * x; };
  EXPECT_NEAR(at(q1, 4.0) - at(q0, 4.0), 102.2, 1e-10);
  EXPECT_EQ(rdmc_true_curve(&cfg, 2, q0), RDMC_E_INVALID_ARGUMENT);
}

TEST(CApi, NullArgumentsAreRejected) {
  rdmc_dataset* ds = nullptr;
  EXPECT_EQ(rdmc_simulate(nullptr, 1, &ds), RDMC_E_INVALID_ARGUMENT);
  EXPECT_NE(std::string(rdmc_last_error()), "");
  const auto cfg = small_config(10);
  EXPECT_EQ(rdmc_simulate(&cfg, 1, nullptr), RDMC_E_INVALID_ARGUMENT);
  rdmc_dataset_free(nullptr);
  rdmc_curve_free(nullptr);
}

TEST(CApi, FullPipeline) {
  const auto cfg = small_config(1500);
  rdmc_dataset* ds = nullptr;
  ASSERT_EQ(rdmc_simulate(&cfg, 21, &ds), RDMC_OK) << rdmc_last_error();
  EXPECT_EQ(rdmc_dataset_size(ds), 1500u);
  EXPECT_EQ(rdmc_dataset_covariate_count(ds), 2u);
  EXPECT_STREQ(rdmc_dataset_covariate_name(ds, 0), "w1");
  size_t counts[4];
  rdmc_dataset_region_counts(ds, counts);
  EXPECT_EQ(counts[0] + counts[1] + counts[2] + counts[3], 1500u);

  rdmc_propensity* p = nullptr;
  ASSERT_EQ(rdmc_propensity_fit(ds, "1,x,w1,w2", RDMC_LINK_LOGIT, &p), RDMC_OK) << rdmc_last_error();
  EXPECT_TRUE(rdmc_propensity_converged(p));
  double gamma[4];
  EXPECT_EQ(rdmc_propensity_coefficients(p, gamma, 4), 4u);

  rdmc_curve* curves[2] = {nullptr, nullptr};
  rdmc_outcome* outcomes[2] = {nullptr, nullptr};
  rdmc_density* f = nullptr;
  ASSERT_EQ(rdmc_density_normal(4.0, 1.7, &f), RDMC_OK);
  const rdmc_estimator est{RDMC_METHOD_DR, -1, RDMC_KERNEL_EPANECHNIKOV};
  for (int j = 0; j < 2; ++j) {
    ASSERT_EQ(rdmc_outcome_fit(ds, j, "1,x,x^2,w1,w2", &outcomes[j]), RDMC_OK) << rdmc_last_error();
    ASSERT_EQ(rdmc_curve_estimate(ds, j, &est, 1.2, p, outcomes[j], nullptr, 41, &curves[j]), RDMC_OK)
        << rdmc_last_error();
    EXPECT_EQ(rdmc_curve_size(curves[j]), 41u);
    EXPECT_EQ(rdmc_curve_target(curves[j]), j);
    EXPECT_EQ(rdmc_curve_bandwidth(curves[j]), 1.2);
    EXPECT_EQ(rdmc_curve_variance(curves[j]), nullptr);
    ASSERT_EQ(rdmc_curve_attach_variance(curves[j], ds, p, outcomes[j], f), RDMC_OK) << rdmc_last_error();
    ASSERT_NE(rdmc_curve_variance(curves[j]), nullptr);
  }
  EXPECT_EQ(rdmc_curve_grid(curves[0])[0], 2.0);
  EXPECT_EQ(rdmc_curve_grid(curves[0])[40], 6.0);

  // Effects need matching open-interval grids.
  rdmc_effect* bad = nullptr;
  EXPECT_EQ(rdmc_effect_estimate(curves[0], curves[1], 0.95, &bad), RDMC_E_ALIGNMENT);
  rdmc_curve* inner[2] = {nullptr, nullptr};
  for (int j = 0; j < 2; ++j) ASSERT_EQ(rdmc_curve_restrict(curves[j], 2.0, 6.0, &inner[j]), RDMC_OK);
  rdmc_effect* e = nullptr;
  ASSERT_EQ(rdmc_effect_estimate(inner[0], inner[1], 0.9, &e), RDMC_OK) << rdmc_last_error();
  ASSERT_EQ(rdmc_effect_size(e), 39u);
  for (size_t k = 0; k < rdmc_effect_size(e); ++k) {
    EXPECT_LT(rdmc_effect_lower(e)[k], rdmc_effect_tau(e)[k]);
    EXPECT_GT(rdmc_effect_upper(e)[k], rdmc_effect_tau(e)[k]);
  }
  EXPECT_EQ(rdmc_effect_level(e), 0.9);

  const rdmc_cost cost{0, 100.0, nullptr, nullptr, 0};
  rdmc_threshold* t = nullptr;
  ASSERT_EQ(rdmc_threshold_optimize(curves[0], curves[1], f, &cost, 0, &t), RDMC_OK) << rdmc_last_error();
  EXPECT_EQ(rdmc_threshold_profile_size(t), 1001u);
  const double c = rdmc_threshold_c_opt(t);
  EXPECT_GE(c, 2.0);
  EXPECT_LE(c, 6.0);
  double nb = 0.0;
  ASSERT_EQ(rdmc_net_benefit(c, curves[0], curves[1], f, &cost, &nb), RDMC_OK);
  EXPECT_NEAR(nb, rdmc_threshold_objective(t), 1e-9 * std::fabs(nb));

  double score = 0.0;
  size_t used = 0, excluded = 0;
  ASSERT_EQ(rdmc_lscv_score(ds, 0, &est, 1.2, p, outcomes[0], &score, &used, &excluded), RDMC_OK);
  EXPECT_GT(score, 0.0);
  const double grid[] = {0.8, 1.2, 1.6};
  rdmc_bandwidth* bw = nullptr;
  ASSERT_EQ(rdmc_bandwidth_select(ds, 0, &est, p, outcomes[0], grid, 3, 0, &bw), RDMC_OK);
  EXPECT_EQ(rdmc_bandwidth_profile_size(bw), 3u);
  EXPECT_GT(rdmc_bandwidth_h(bw), 0.0);

  rdmc_bandwidth_free(bw);
  rdmc_threshold_free(t);
  rdmc_effect_free(e);
  rdmc_effect_free(bad);
  for (int j = 0; j < 2; ++j) {
    rdmc_curve_free(inner[j]);
    rdmc_curve_free(curves[j]);
    rdmc_outcome_free(outcomes[j]);
  }
  rdmc_density_free(f);
  rdmc_propensity_free(p);
  rdmc_dataset_free(ds);
}

TEST(CApi, DatasetFileRoundTripAndErrors) {
  const auto cfg = small_config(300);
  rdmc_dataset* ds = nullptr;
  ASSERT_EQ(rdmc_simulate(&cfg, 4, &ds), RDMC_OK);
  const auto path = (fs::temp_directory_path() / "rdmc_capi_roundtrip.csv").string();
  ASSERT_EQ(rdmc_dataset_write(ds, path.c_str()), RDMC_OK) << rdmc_last_error();

  const char* covs[] = {"w1", "w2"};
  const rdmc_schema schema{nullptr, nullptr, nullptr, nullptr, covs, 2, 0};
  rdmc_dataset* back = nullptr;
  ASSERT_EQ(rdmc_dataset_load(path.c_str(), &schema, 2.0, 6.0, &back), RDMC_OK) << rdmc_last_error();
  ASSERT_EQ(rdmc_dataset_size(back), 300u);
  std::vector<double> a(300), b(300);
  ASSERT_EQ(rdmc_dataset_running_variable(ds, a.data(), a.size()), RDMC_OK);
  ASSERT_EQ(rdmc_dataset_running_variable(back, b.data(), b.size()), RDMC_OK);
  EXPECT_EQ(a, b);

  rdmc_dataset* none = nullptr;
  EXPECT_EQ(rdmc_dataset_load("/nonexistent/file.csv", &schema, 2.0, 6.0, &none), RDMC_E_IO);
  EXPECT_EQ(none, nullptr);

  rdmc_dataset_free(back);
  rdmc_dataset_free(ds);
  std::remove(path.c_str());
}

TEST(CApi, UnknownCovariateTermIsRejected) {
  const auto cfg = small_config(400);
  rdmc_dataset* ds = nullptr;
  ASSERT_EQ(rdmc_simulate(&cfg, 2, &ds), RDMC_OK);
  rdmc_propensity* p = nullptr;
  EXPECT_EQ(rdmc_propensity_fit(ds, "1,x,w3", RDMC_LINK_LOGIT, &p), RDMC_E_CONFIGURATION);
  rdmc_dataset_free(ds);
}

TEST(CApi, BenchmarkCells) {
  auto cfg = small_config(300);
  const rdmc_bench_options opt{RDMC_KERNEL_EPANECHNIKOV, 41, 0, 1.5};
  rdmc_bench* r = nullptr;
  ASSERT_EQ(rdmc_bench_run(&cfg, 2, 10, "table2", &opt, &r), RDMC_OK) << rdmc_last_error();
  ASSERT_EQ(rdmc_bench_cell_count(r), 4u);
  const char* est = nullptr;
  const char* nuis = nullptr;
  int target = -1;
  double mise = 0, mean_h = 0;
  size_t reps = 0, failed = 0;
  ASSERT_EQ(rdmc_bench_cell(r, 3, &est, &nuis, &target, &mise, &reps, &failed, &mean_h), RDMC_OK);
  EXPECT_STREQ(est, "dr");
  EXPECT_STREQ(nuis, "both_wrong");
  EXPECT_EQ(target, 0);
  EXPECT_EQ(reps, 2u);
  EXPECT_EQ(mean_h, 1.5);
  EXPECT_GT(rdmc_bench_cell_ise(r, 3)[0], 0.0);
  rdmc_bench_free(r);
  rdmc_bench* none = nullptr;
  EXPECT_EQ(rdmc_bench_run(&cfg, 2, 10, "table9", &opt, &none), RDMC_E_CONFIGURATION);
}

}  // namespace
