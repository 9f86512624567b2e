#pragma once

#include <cstdint>
#include <vector>

namespace gclab {

// Deterministic, splittable random source.
//
// Built on the SplitMix64 mixing function applied to a counter, so a
// (seed, stream) pair fully determines the whole sequence independently of
// platform or standard library.  Gaussians come from Box-Muller rather than
// std::normal_distribution, whose algorithm is implementation-defined; this
// keeps every artifact byte-identical across toolchains.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

  // Derive an independent child generator.  Children with distinct stream
  // ids are decorrelated from each other and from the parent, and the split
  // does not advance the parent's counter.
  [[nodiscard]] SeededRng split(std::uint64_t stream) const;

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random mantissa bits.
  double next_unit();

  // Uniform integer in [0, bound); bound must be positive.
  std::uint64_t next_below(std::uint64_t bound);

  // Standard normal draw (Box-Muller; the second value of each pair is
  // cached, so draws come in deterministic order).
  double next_gaussian();

  // Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<std::uint32_t> permutation(std::size_t n);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer: bijective 64-bit mix with full avalanche.
std::uint64_t mix64(std::uint64_t x);

}  // namespace gclab
