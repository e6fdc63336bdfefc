#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace amortlab {

// AMORTLAB_WORKERS if set to a positive integer, else the hardware thread
// count (at least 1).
std::size_t worker_count();

// Independent per-item seed derived from a suite seed (splitmix64 over the
// pair), so results do not depend on scheduling.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

// Runs f(i) for i in [0, n) on a bounded pool and returns the results in
// index order. The first exception by index is rethrown after all workers
// finish.
template <class F>
auto parallel_map(std::size_t n, F f, std::size_t workers = worker_count())
    -> std::vector<decltype(f(std::size_t{}))> {
  using T = decltype(f(std::size_t{}));
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = std::min(workers == 0 ? 1 : workers, n);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace amortlab
