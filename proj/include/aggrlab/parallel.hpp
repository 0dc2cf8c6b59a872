#pragma once

#include <cstddef>
#include <functional>

namespace aggrlab {

// Worker count: AGGRLAB_THREADS caps it, default all cores.
unsigned worker_count();

// Runs fn(0..count-1) across workers.  Each index owns its output slot, so
// results are independent of completion order.  Exceptions inside fn must be
// captured by the caller's closure.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace aggrlab
