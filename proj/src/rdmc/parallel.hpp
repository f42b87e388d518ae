// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace rdmc {

/// Worker count from RDMC_THREADS (unset or 0 means hardware concurrency).
std::size_t worker_count();

/// Runs body(0..n-1) across workers. Nested calls run serially on the calling
/// thread. The first exception thrown by any body is rethrown after all
/// workers stop. Callers write results by index, so output is independent of
/// scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rdmc
