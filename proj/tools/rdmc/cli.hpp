// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "manifest.hpp"

namespace rdmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Result of parsing a command line. `manifest` is empty when parsing ended
/// early (help, version, usage error); `exit_code` and `message` then say why.
struct Invocation {
  std::optional<RunManifest> manifest;
  int exit_code = kExitOk;
  std::string message;
};

/// `args` excludes the program name. Defaults are resolved, including feature
/// specs built from the covariate columns of --data when it is readable.
Invocation parse_invocation(const std::vector<std::string>& args);

/// Runs a validated manifest, writing tables and their manifest sidecars.
/// Returns 0 on success, 1 on computation or input errors, 2 on usage errors.
int execute(const RunManifest& manifest, std::ostream& out, std::ostream& err);

/// parse_invocation followed by execute.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Path of the JSON sidecar that accompanies an output table.
std::string sidecar_path(const std::string& output);

}  // namespace rdmc::cli
