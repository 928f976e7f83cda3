#pragma once

#include "bincomp/common.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace bincomp {

/// Global worker count; 0 means "use all hardware threads".
inline int& worker_count() {
  static int count = 0;
  return count;
}

inline void set_worker_count(int n) { worker_count() = n < 0 ? 0 : n; }

inline int effective_workers() {
  int n = worker_count();
  if (n == 0) {
    unsigned hw = std::thread::hardware_concurrency();
    n = hw == 0 ? 1 : static_cast<int>(hw);
  }
  return n;
}

/// Runs body(i) for i in [0, n). Iterations must write only to disjoint,
/// preallocated slots; under that contract the result is independent of the
/// schedule. Exceptions are captured and rethrown on the calling thread.
template <class F>
void parallel_for(Index n, F&& body) {
  int workers = effective_workers();
  if (workers <= 1 || n <= 1) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  if (workers > n) workers = static_cast<int>(n);
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        Index i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace bincomp
