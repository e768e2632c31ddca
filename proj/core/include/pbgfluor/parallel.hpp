// parallel.hpp — Deterministic fan-out over independent work items

#pragma once

#include <cstddef>
#include <functional>

namespace pbgfluor {

// Worker count from PBGFLUOR_WORKERS, else hardware concurrency (>= 1).
std::size_t default_worker_count();

// Calls fn(i) for i in [0, count) on up to `workers` threads. Items are
// independent; results must be written to per-item slots. The first exception
// thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

} // namespace pbgfluor
