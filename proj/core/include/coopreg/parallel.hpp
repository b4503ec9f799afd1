#pragma once

#include <cstdint>
#include <functional>

namespace coopreg {

/// Worker count from COOPREG_JOBS, defaulting to 1.
int default_jobs();

/**
 * Runs body(i) for i in [0, count) on up to `jobs` threads. Results must be
 * written to per-index slots so the outcome does not depend on scheduling.
 * The first exception thrown by a body is rethrown after all workers stop.
 */
void parallel_for(std::int64_t count, int jobs, const std::function<void(std::int64_t)>& body);

/// Deterministic per-task seed derived from a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

} // namespace coopreg
