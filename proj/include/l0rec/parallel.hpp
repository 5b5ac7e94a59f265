#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "l0rec/types.hpp"

namespace l0rec {

/// Worker count: L0REC_THREADS if set and positive, else hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("L0REC_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
// Set on worker threads so nested loops run inline instead of oversubscribing.
inline thread_local bool in_worker = false;
}  // namespace detail

/// Runs body(i) for i in [begin, end) over contiguous blocks. Callers write
/// results into per-index slots, so output never depends on the schedule.
template <typename Body>
void parallel_for(Index begin, Index end, Body&& body) {
  const Index n = end - begin;
  if (n <= 0) return;
  const auto workers = detail::in_worker ? Index{1} : static_cast<Index>(std::min<Index>(thread_count(), n));
  if (workers <= 1) {
    for (Index i = begin; i < end; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    const Index lo = begin + n * w / workers;
    const Index hi = begin + n * (w + 1) / workers;
    pool.emplace_back([&, lo, hi] {
      detail::in_worker = true;
      try {
        for (Index i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace l0rec
