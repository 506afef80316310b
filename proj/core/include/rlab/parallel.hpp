#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace rlab {

// Worker count: RICCI_LAB_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

// Calls fn(i) for i in [0, n) across worker threads. Each index is written by
// exactly one worker, so results stored per index are deterministic. The
// first exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace rlab
