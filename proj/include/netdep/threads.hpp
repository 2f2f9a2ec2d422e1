#pragma once

#include <functional>

namespace netdep {

/// Run fn(0..count-1) across up to `threads` workers. Work items must be
/// independent; exceptions are captured and the one from the lowest index is
/// rethrown after all workers join, so failures are deterministic.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

/// Hardware concurrency with a floor of 1.
int default_thread_count();

}  // namespace netdep
