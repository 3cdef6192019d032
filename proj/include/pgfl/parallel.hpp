#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace pgfl {

inline unsigned default_thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs body(k) for k in [0, count) over `threads` workers with a static
/// contiguous partition. Every index is written by exactly one worker, so
/// results do not depend on the thread count. The exception thrown for the
/// smallest index (if any) is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }

  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::size_t> failed_at(threads, count);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = count * t / threads;
      const std::size_t end = count * (t + 1) / threads;
      workers.emplace_back([&, t, begin, end] {
        for (std::size_t k = begin; k < end; ++k) {
          try {
            body(k);
          } catch (...) {
            errors[t] = std::current_exception();
            failed_at[t] = k;
            return;
          }
        }
      });
    }
  }
  // Workers own ascending index ranges, so the first failing worker holds
  // the smallest failing index.
  for (unsigned t = 0; t < threads; ++t)
    if (errors[t]) std::rethrow_exception(errors[t]);
}

}  // namespace pgfl
