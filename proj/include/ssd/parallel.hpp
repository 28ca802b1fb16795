#pragma once

#include <cstddef>
#include <functional>

namespace ssd {

/// Worker threads used by parallel loops (0 = hardware concurrency).
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n) on the worker pool. Bodies must only write to slots
/// owned by their index; results are then independent of the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ssd
