#pragma once

#include <cstddef>
#include <functional>

namespace ergogof {

/// Worker count used when a caller passes 0: hardware concurrency, at least 1.
unsigned default_threads();

/// Runs body(i) for i in [0, n) on `threads` workers. Indices are handed out
/// dynamically, so body must write only to slot i of its output; callers
/// then reduce in index order, which keeps results independent of the
/// worker count. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace ergogof
