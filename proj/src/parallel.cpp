#include "aggrlab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace aggrlab {

unsigned worker_count() {
  unsigned count = std::thread::hardware_concurrency();
  if (count == 0) count = 1;
  if (const char* env = std::getenv("AGGRLAB_THREADS")) {
    long requested = std::strtol(env, nullptr, 10);
    if (requested >= 1 && unsigned(requested) < count) count = unsigned(requested);
  }
  return count;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  unsigned workers = worker_count();
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& thread : pool) thread.join();
}

}  // namespace aggrlab
