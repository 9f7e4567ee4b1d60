#include "numeric/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace sf::numeric {
namespace {

std::atomic<std::size_t>& thread_cap() {
  static std::atomic<std::size_t> cap = [] {
    std::size_t n = 1;
    if (const char* env = std::getenv("SPECTRAL_FORECASTER_THREADS")) {
      try {
        n = static_cast<std::size_t>(std::stoul(env));
      } catch (...) {
        n = 1;
      }
    }
    return std::max<std::size_t>(n, 1);
  }();
  return cap;
}

constexpr std::size_t kMinWorkPerThread = 1 << 16;

// Nested calls from a worker run serially.
thread_local bool t_in_parallel = false;

}  // namespace

std::size_t max_threads() { return thread_cap().load(); }

void set_max_threads(std::size_t n) { thread_cap().store(std::max<std::size_t>(n, 1)); }

void parallel_for(std::size_t n, std::size_t work_per_item,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t total = n * std::max<std::size_t>(work_per_item, 1);
  std::size_t threads = t_in_parallel ? 1 : std::min({max_threads(), n, total / kMinWorkPerThread});
  if (threads <= 1) {
    fn(0, n);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::exception_ptr> errors(threads);
  auto run = [&fn, &errors](std::size_t slot, std::size_t b, std::size_t e) {
    t_in_parallel = true;
    try {
      fn(b, e);
    } catch (...) {
      errors[slot] = std::current_exception();
    }
    t_in_parallel = false;
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) {
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back(run, t, b, e);
  }
  run(0, 0, std::min(n, chunk));
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace sf::numeric
