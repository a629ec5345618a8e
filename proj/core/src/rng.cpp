#include "dicoh/rng.hpp"

#include "dicoh/error.hpp"

namespace dicoh {

double SeededRng::uniform(double lo, double hi) {
  // 53 random mantissa bits, independent of std::uniform_real_distribution.
  double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::size_t SeededRng::index(std::size_t n) {
  if (n == 0) throw PreconditionError("SeededRng::index called with n = 0");
  // Rejection sampling removes modulo bias.
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % range);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

bool SeededRng::bernoulli(double p) { return uniform(0.0, 1.0) < p; }

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2);
  z ^= b * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace dicoh
