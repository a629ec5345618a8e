#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dicoh {

// The only source of randomness in the library. Every stochastic routine
// takes one of these explicitly so runs replay exactly from their seed.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  double uniform(double lo, double hi);
  // Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);
  bool bernoulli(double p);
  std::uint64_t next_u64() { return engine_(); }

  template <typename It>
  void shuffle(It first, It last) {
    // Fisher-Yates driven by index() so the order does not depend on the
    // standard library's std::shuffle implementation.
    auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = index(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Deterministic seed derivation (splitmix64 finaliser).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t hash_string(std::string_view s);

}  // namespace dicoh
