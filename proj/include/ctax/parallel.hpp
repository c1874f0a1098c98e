#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace ctax {

// Runs f(0..n-1) on up to `jobs` threads. The first exception by index is
// rethrown after all work finishes.
template <class F>
void parallel_for(int n, int jobs, F&& f) {
  std::vector<std::exception_ptr> errors(std::max(n, 0));
  auto run = [&](int k) {
    try {
      f(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const int workers = std::clamp(jobs, 1, std::max(1, n));
  if (workers == 1) {
    for (int k = 0; k < n; ++k) run(k);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int k = next++; k < n; k = next++) run(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ctax
