#pragma once

#include <cstddef>
#include <functional>

namespace adia {

/// Worker cap from ADIA_CHECK_THREADS (>= 1); hardware concurrency when unset.
std::size_t thread_budget();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Exceptions are
/// collected and the one from the lowest index is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace adia
