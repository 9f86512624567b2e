#include "gclab/rng.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

namespace gclab {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

SeededRng SeededRng::split(std::uint64_t stream) const {
  // Child seed mixes the parent seed with the stream id twice so that
  // (seed, stream) collisions require a full 64-bit collision of the mix.
  return SeededRng(mix64(seed_ ^ mix64(stream ^ 0xD1B54A32D192ED03ULL)));
}

std::uint64_t SeededRng::next_u64() { return mix64(seed_ ^ mix64(++counter_)); }

double SeededRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::next_below(std::uint64_t bound) {
  assert(bound > 0);
  // Rejection sampling on the top bits; bias-free for any bound.
  const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
  std::uint64_t draw;
  do {
    draw = next_u64();
  } while (draw >= limit);
  return draw % bound;
}

double SeededRng::next_gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on (0,1] x [0,1): u1 is flipped so log(u1) is finite.
  const double u1 = 1.0 - next_unit();
  const double u2 = next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<std::uint32_t> SeededRng::permutation(std::size_t n) {
  std::vector<std::uint32_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t j = next_below(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

}  // namespace gclab
