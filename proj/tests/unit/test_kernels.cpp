// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rdmc/error.hpp"
#include "rdmc/kernels.hpp"

namespace rdmc {
namespace {

using testing::simpson;

const KernelSpec kEpa{KernelFamily::epanechnikov};
const KernelSpec kGauss{KernelFamily::gaussian};
const KernelSpec kTri{KernelFamily::triangular};

// Integral of f(u) K(u) over the support, split at 0 so piecewise kernels are smooth on each part.
double moment(KernelSpec k, const std::function<double(double)>& f) {
  const double a = k.family == KernelFamily::gaussian ? 12.0 : 1.0;
  auto g = [&](double u) { return f(u); };
  return simpson(g, -a, 0.0, 20000) + simpson(g, 0.0, a, 20000);
}

TEST(Kernels, PointValues) {
  EXPECT_DOUBLE_EQ(kernel_value(kEpa, 0.0), 0.75);
  EXPECT_DOUBLE_EQ(kernel_value(kEpa, 1.5), 0.0);
  EXPECT_NEAR(kernel_value(kGauss, 0.0), 0.3989422804014327, 1e-15);
  EXPECT_DOUBLE_EQ(kernel_value(kTri, 0.5), 0.5);
}

TEST(Kernels, ScaledWeights) {
  EXPECT_DOUBLE_EQ(scaled_kernel_weight(kEpa, 0.0, 2.0), 0.375);
  EXPECT_DOUBLE_EQ(scaled_kernel_weight(kEpa, 2.0, 1.0), 0.0);
  EXPECT_NEAR(scaled_kernel_weight(kGauss, 1.0, 1.0), testing::normal_pdf_series(1.0), 1e-14);
  EXPECT_NEAR(scaled_kernel_weight(kGauss, 1.0, 1.0), 0.2419707245191434, 1e-15);
  for (double h : {0.0, -1.0}) {
    try {
      scaled_kernel_weight(kEpa, 0.1, h);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::domain);
    }
  }
}

TEST(Kernels, ConstantsMatchQuadrature) {
  for (auto k : {kEpa, kGauss, kTri}) {
    const auto c = kernel_constants(k);
    const double c2 = moment(k, [&](double u) { return u * u * kernel_value(k, u); });
    const double r = moment(k, [&](double u) { return kernel_value(k, u) * kernel_value(k, u); });
    EXPECT_NEAR(c.c2, c2, 1e-10) << to_string(k.family);
    EXPECT_NEAR(c.r, r, 1e-10) << to_string(k.family);
    EXPECT_GT(c.c2, 0.0);
    EXPECT_GT(c.r, 0.0);
  }
  EXPECT_DOUBLE_EQ(kernel_constants(kEpa).c2, 0.2);
  EXPECT_DOUBLE_EQ(kernel_constants(kEpa).r, 0.6);
  EXPECT_DOUBLE_EQ(kernel_constants(kGauss).c2, 1.0);
  EXPECT_NEAR(kernel_constants(kGauss).r, 0.28209479177387814, 1e-15);
  EXPECT_NEAR(kernel_constants(kTri).c2, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(kernel_constants(kTri).r, 2.0 / 3.0, 1e-15);
}

TEST(Kernels, UnitMassSymmetryAndScaling) {
  for (auto k : {kEpa, kGauss, kTri}) {
    EXPECT_NEAR(moment(k, [&](double u) { return kernel_value(k, u); }), 1.0, 1e-10);
    for (double u : {0.0, 0.1, 0.37, 0.9, 1.0, 1.3, 2.5}) {
      EXPECT_EQ(kernel_value(k, u), kernel_value(k, -u));
      for (double h : {0.3, 1.0, 2.7}) {
        EXPECT_EQ(scaled_kernel_weight(k, u, h), kernel_value(k, u / h) / h);
      }
    }
  }
}

TEST(Kernels, SupportAndNames) {
  EXPECT_EQ(kernel_support(kEpa), 1.0);
  EXPECT_EQ(kernel_support(kTri), 1.0);
  EXPECT_FALSE(kernel_support(kGauss).has_value());
  for (auto f : {KernelFamily::epanechnikov, KernelFamily::gaussian, KernelFamily::triangular}) {
    EXPECT_EQ(parse_kernel_family(to_string(f)), f);
  }
  EXPECT_FALSE(parse_kernel_family("uniform").has_value());
}

}  // namespace
}  // namespace rdmc
