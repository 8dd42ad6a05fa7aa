#pragma once

#include <cstddef>
#include <functional>

namespace tpms {

/// Worker count for internal parallel loops: hardware concurrency, capped by
/// the TPMS_CPIA_THREADS environment variable when it holds a positive integer.
unsigned thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, count). Chunks are
/// disjoint, so bodies that write only to their own indices stay deterministic.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace tpms
