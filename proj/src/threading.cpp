#include "hgn/threading.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace hgn {

int thread_count() {
  static const int cached = [] {
    const char* env = std::getenv("HGN_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    int n = std::atoi(env);
    return n < 1 ? 1 : n;
  }();
  return cached;
}

void parallel_blocks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t, int)>& fn) {
  if (n == 0) return;
  int blocks = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (blocks == 1) {
    fn(0, n, 0);
    return;
  }
  std::size_t chunk = (n + blocks - 1) / blocks;
  std::vector<std::thread> pool;
  pool.reserve(blocks - 1);
  for (int b = 1; b < blocks; ++b) {
    std::size_t begin = b * chunk;
    if (begin >= n) break;
    std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&fn, begin, end, b] { fn(begin, end, b); });
  }
  fn(0, std::min(n, chunk), 0);
  for (auto& t : pool) t.join();
}

}  // namespace hgn
