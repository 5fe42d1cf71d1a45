#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ipmn {

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);
/// Seed of sub-stream `stream` of `seed`; stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator whose draws are identical on every platform: the
/// engine is std::mt19937_64 (fully specified) and the distributions are
/// implemented here rather than taken from <random>.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Box-Muller, cached pair).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Poisson by inversion; fine for the small means used here.
  int poisson(double mean);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ipmn
