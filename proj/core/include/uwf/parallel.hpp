#pragma once

#include <cstddef>
#include <functional>

namespace uwf {

/// Worker count: UWF_THREADS if set (>= 1), otherwise hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Indices are split into contiguous chunks, one per
/// worker; callers write results by index so the outcome never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace uwf
