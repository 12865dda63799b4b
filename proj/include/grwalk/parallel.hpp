#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace grwalk {

/// Worker cap. Results never depend on it.
struct ExecutionPolicy {
  unsigned threads = 1;
};

/// Calls body(i) for i in [0, n) on up to policy.threads workers. Tasks are
/// handed out dynamically; the first exception is rethrown after all workers
/// stop.
template <class Body>
void parallel_for(std::size_t n, const ExecutionPolicy& policy, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, policy.threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace grwalk
