#pragma once

#include <cstddef>
#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace maslov {

/// Worker count from MASLOV_WORKERS; 1 when unset or invalid.
inline int worker_count() {
  const char* env = std::getenv("MASLOV_WORKERS");
  if (!env) return 1;
  const int w = std::atoi(env);
  return w >= 1 ? w : 1;
}

/// Calls f(i) for i in [0, n).  Each index is handled by exactly one worker
/// and results are expected to be written to slot i, so the outcome does not
/// depend on the worker count.  The first exception (lowest index) is rethrown.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace maslov
