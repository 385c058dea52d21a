#pragma once

#include <functional>

namespace ddgroup {

// Runs fn(i) for every i in [0, count) on up to jobs threads. Work is split
// into contiguous chunks, so output written to caller-owned per-index slots
// is identical for any job count. The first exception (by thread order) is
// rethrown after all threads join.
void parallel_for(long count, int jobs, const std::function<void(long)>& fn);

}  // namespace ddgroup
