#pragma once

#include <functional>

namespace stagemg {

/**
 * Runs fn(i) for i in [0, n). With threads <= 1 the loop is sequential; with
 * more threads the index range is split into contiguous chunks, one worker
 * per chunk. Bodies must write to disjoint locations, which keeps results
 * independent of the worker count.
 */
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace stagemg
