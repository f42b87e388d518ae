// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace rdmc {

enum class KernelFamily { epanechnikov, gaussian, triangular };

struct KernelSpec {
  KernelFamily family = KernelFamily::epanechnikov;

  bool operator==(const KernelSpec&) const = default;
};

/// Second moment and roughness of a kernel.
struct KernelConstants {
  double c2 = 0.0;  ///< integral of s^2 K(s)
  double r = 0.0;   ///< integral of K(s)^2
};

double kernel_value(KernelSpec spec, double u);

/// K((x_i - x) / h) / h. Throws ErrorCode::domain for h <= 0.
double scaled_kernel_weight(KernelSpec spec, double diff, double h);

KernelConstants kernel_constants(KernelSpec spec);

/// Half-width of the support in units of h; nullopt for unbounded kernels.
std::optional<double> kernel_support(KernelSpec spec);

std::string to_string(KernelFamily family);
std::optional<KernelFamily> parse_kernel_family(std::string_view name);

}  // namespace rdmc
