#pragma once

#include <cstddef>
#include <functional>

namespace privae {

/// Worker cap: PRIVAE_THREADS if set and positive, otherwise the hardware
/// concurrency (at least 1).
std::size_t thread_budget();

/// Runs body(i) for i in [0, count) on up to thread_budget() threads. Callers
/// write results into per-index slots and reduce afterwards in index order,
/// so results do not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace privae
