#pragma once

#include <cstddef>
#include <functional>

namespace rcabs {

/// Worker count from RCABS_THREADS (default: hardware concurrency, at least 1).
std::size_t default_thread_count();

/// Calls body(i) for i in [0, n) on up to `threads` workers. Each index is
/// visited exactly once; callers write results into per-index slots so the
/// outcome does not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t threads = default_thread_count());

} // namespace rcabs
