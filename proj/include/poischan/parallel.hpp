#pragma once

#include <cstddef>
#include <functional>

namespace poischan {

// Worker count: TOOL_THREADS if set to a positive integer, otherwise the
// hardware concurrency.
int worker_threads();

// Runs fn(i) for i in [0, n). Each index must write only to its own slot of
// any shared output, so results do not depend on the thread count; callers
// then reduce in index order. Nested calls run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace poischan
