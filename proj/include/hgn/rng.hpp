#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace hgn {

// Deterministic random stream. The engine is std::mt19937_64 (bit-exact by
// the standard); uniform/normal conversions are done by hand so results do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent sub-stream for (seed, stream). Used for per-sample
  // generation so datasets are reproducible regardless of evaluation order.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();   // standard normal, Box-Muller
  double normal(double mean, double stddev);
  bool bernoulli(double p);
  std::uint64_t uniform_index(std::uint64_t n);  // [0, n)

  template <typename T>
  void shuffle(std::vector<T>& items) {
    if (items.empty()) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i + 1));
      std::swap(items[i], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace hgn
