#pragma once

#include <cstddef>
#include <functional>

namespace parajulia {

/// Number of worker threads used by parallel_for (hardware concurrency,
/// overridable with the PARAJULIA_THREADS environment variable).
unsigned worker_count();

/// Calls body(i) for i in [0, n) using static contiguous blocks, one per worker.
/// Results are deterministic as long as body(i) only writes slot i.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace parajulia
