#pragma once

#include <cstddef>
#include <functional>

namespace mvlevy {

/// Calls body(begin, end) on a static partition of [0, n) into contiguous
/// chunks. threads <= 0 uses the runtime default. Each index is visited
/// exactly once; callers that only write per-index slots get results that do
/// not depend on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& body);

/// Worker count parallel_for would use for `threads`.
int resolve_threads(int threads);

}  // namespace mvlevy
