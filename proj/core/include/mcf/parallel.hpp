// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace mcf {

/// Worker count from MCF_WORKERS, else the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs fn(i) for every i in [0, count) across worker_count() threads. Each
/// index runs exactly once; callers write results into per-index slots so
/// the outcome does not depend on scheduling. The first exception thrown
/// (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace mcf
