#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace hspw {

/// Worker count: HSPW_LAB_THREADS when set and positive, otherwise the
/// hardware concurrency. Read on every call so tests can change it.
int thread_limit();

/// Runs task(i) for i in [0, count). Tasks must be independent; results are
/// written by index, so any reduction the caller performs afterwards sees the
/// same order regardless of the worker count. Nested calls run serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

template <typename T, typename F>
std::vector<T> parallel_map(std::size_t count, F&& f) {
  std::vector<T> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace hspw
