#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "netmarket/errors.hpp"

namespace netmarket {

/// Worker count for parallel loops: the NETMARKET_THREADS environment
/// variable caps it, with 0 or unset meaning "use the hardware".
inline unsigned thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const char* env = std::getenv("NETMARKET_THREADS");
  if (env == nullptr || *env == '\0') return hw;
  char* end = nullptr;
  const long parsed = std::strtol(env, &end, 10);
  if (end == nullptr || *end != '\0' || parsed < 0) {
    throw config_error("NETMARKET_THREADS must be a nonnegative integer, got '" +
                       std::string(env) + "'");
  }
  if (parsed == 0) return hw;
  return static_cast<unsigned>(parsed) < hw ? static_cast<unsigned>(parsed) : hw;
}

/// Runs fn(i) for i in [0, n) on up to thread_count() threads.
///
/// fn must be safe to call concurrently for distinct i and must not throw;
/// writes should go to disjoint slots so results are identical to the
/// serial order (callers do any reduction afterwards, deterministically).
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const unsigned workers0 = thread_count();
  const std::size_t workers =
      workers0 < n ? static_cast<std::size_t>(workers0) : (n > 0 ? n : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      // Strided assignment: deterministic partition, no shared counter.
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace netmarket
