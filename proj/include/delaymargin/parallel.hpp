#pragma once

#include <cstddef>
#include <functional>

namespace delaymargin {

/// Worker count: DELAY_MARGIN_THREADS when set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
unsigned worker_count();

/// Calls body(i) for i in [0, n) across up to worker_count() threads.
/// Iterations must be independent; exceptions from the body are rethrown
/// (the one with the lowest index wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace delaymargin
