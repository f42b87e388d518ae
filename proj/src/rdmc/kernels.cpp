// SPDX-License-Identifier: Apache-2.0
#include "rdmc/kernels.hpp"

#include <cmath>
#include <numbers>

#include "rdmc/error.hpp"

namespace rdmc {

double kernel_value(KernelSpec spec, double u) {
  const double a = std::abs(u);
  switch (spec.family) {
    case KernelFamily::epanechnikov:
      return a <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelFamily::gaussian:
      return std::exp(-0.5 * u * u) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
    case KernelFamily::triangular:
      return a <= 1.0 ? 1.0 - a : 0.0;
  }
  return 0.0;
}

double scaled_kernel_weight(KernelSpec spec, double diff, double h) {
  if (!(h > 0.0)) {
    throw Error(ErrorCode::domain, "bandwidth must be positive");
  }
  return kernel_value(spec, diff / h) / h;
}

KernelConstants kernel_constants(KernelSpec spec) {
  switch (spec.family) {
    case KernelFamily::epanechnikov:
      return {0.2, 0.6};
    case KernelFamily::gaussian:
      return {1.0, 0.5 * std::numbers::inv_sqrtpi};
    case KernelFamily::triangular:
      return {1.0 / 6.0, 2.0 / 3.0};
  }
  return {};
}

std::optional<double> kernel_support(KernelSpec spec) {
  if (spec.family == KernelFamily::gaussian) return std::nullopt;
  return 1.0;
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::epanechnikov: return "epanechnikov";
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::triangular: return "triangular";
  }
  return "unknown";
}

std::optional<KernelFamily> parse_kernel_family(std::string_view name) {
  if (name == "epanechnikov") return KernelFamily::epanechnikov;
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "triangular") return KernelFamily::triangular;
  return std::nullopt;
}

}  // namespace rdmc
