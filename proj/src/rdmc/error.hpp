// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace rdmc {

// Stable categories; the C API maps these one-to-one onto rdmc_status codes.
enum class ErrorCode {
  io = 1,
  schema,
  parse,
  validation,
  domain,
  separation,
  rank,
  sample_size,
  insufficient_support,
  conditioning,
  configuration,
  bandwidth_infeasible,
  selection,
  alignment,
  density_floor,
  degenerate_sample,
  unreliable_ise,
  convergence,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rdmc
