#ifndef LD_PARALLEL_HPP
#define LD_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ld::detail {

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Chunked work-stealing loop. body(i) must be independent of execution order
// so results do not depend on scheduling or worker count.
template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  const int w = std::min<std::size_t>(resolve_workers(workers), count);
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> has_error{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  constexpr std::size_t chunk = 16;

  auto work = [&] {
    try {
      for (;;) {
        const std::size_t start = next.fetch_add(chunk);
        if (start >= count || has_error.load(std::memory_order_relaxed)) {
          return;
        }
        const std::size_t end = std::min(count, start + chunk);
        for (std::size_t i = start; i < end; ++i) body(i);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!has_error.exchange(true)) error = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int t = 0; t < w; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ld::detail

#endif  // LD_PARALLEL_HPP
