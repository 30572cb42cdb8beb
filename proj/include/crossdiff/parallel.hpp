#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace crossdiff {

// Worker cap: CROSSDIFF_THREADS if set and positive, else the hardware concurrency.
int thread_limit();

// Calls body(i) for every i in [0, n). Each index writes only its own output slot, so
// results do not depend on scheduling. The first exception (by index) is rethrown.
template <class Body>
void parallel_for(int n, Body&& body) {
  const int workers = std::min(thread_limit(), n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(n, 0)));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace crossdiff
