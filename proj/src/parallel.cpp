#include "r2s/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace r2s {

namespace {

std::atomic<unsigned> g_threads{0};

unsigned resolve_threads() {
  unsigned n = g_threads.load();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

constexpr std::size_t kBlock = 256;

}  // namespace

void set_thread_count(unsigned n) { g_threads.store(n); }

unsigned thread_count() { return resolve_threads(); }

void parallel_for_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(resolve_threads(), blocks));

  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b)
      fn(b * kBlock, std::min(n, (b + 1) * kBlock));
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        fn(b * kBlock, std::min(n, (b + 1) * kBlock));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned i = 0; i + 1 < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace r2s
