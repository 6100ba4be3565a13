#pragma once

#include <cstddef>
#include <functional>

namespace ccpt {

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 means hardware
/// concurrency). Items are claimed dynamically; the first exception thrown by any item is
/// rethrown after all workers stop. Callers must make items independent.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace ccpt
