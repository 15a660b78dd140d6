#pragma once

// SplitMix64. Chosen over std::mt19937 because the sequence is fixed by the
// algorithm itself, not by library implementation details, so seeded runs
// reproduce bit for bit on any platform.

#include <cstdint>

namespace codedmm {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53 bits of mantissa
  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Deterministically derive the seed for an independent substream. Used to
  // give matrices, inputs and every trial their own generator so adding
  // trials never perturbs earlier draws.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed) ^ mix(stream ^ 0xd1b54a32d192ed03ull));
  }

 private:
  std::uint64_t state_;
};

}  // namespace codedmm
