#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace rdforge {

// Deterministic PRNG (xoshiro256** seeded through splitmix64). The toolkit
// never uses std:: distributions because their output is implementation
// defined; every draw here is fully specified, so identical seeds give
// identical streams on any platform.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform();

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  // Gaussian via Box-Muller with a cached spare.
  double normal(double mean, double stddev);

  // Unbiased integer in [0, n) via rejection sampling. n must be > 0.
  uint64_t below(uint64_t n);

  // Fisher-Yates shuffle driven by below().
  template <class T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (size_t i = v.size() - 1; i > 0; --i) {
      const size_t j = static_cast<size_t>(below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

  // Derives a sub-seed for a named stream, so e.g. parameter init and batch
  // shuffling draw from independent sequences of one master seed.
  static uint64_t derive(uint64_t seed, std::string_view stream);

 private:
  uint64_t state_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rdforge
