// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace sgm {

/// Counter-based generator built on the SplitMix64 finalizer.
///
/// Word n of stream `seed` is
///
///     mix64(seed + (n + 1) * 0x9E3779B97F4A7C15)      (all arithmetic mod 2^64)
///
/// with mix64 the SplitMix64 output function (shift/xor/multiply by
/// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB). This is exactly the output
/// sequence of the reference SplitMix64 generator seeded with `seed`, but any
/// word can be computed independently, so the stream is random-access and
/// reproducible on every platform. split(tag) derives an independent child
/// stream whose seed is mix64 of the parent seed xor'ed with a tag-derived word.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t word(std::uint64_t n) const noexcept { return mix64(seed_ + (n + 1) * kGolden); }

  /// Word n mapped to [0, 1): the top 53 bits scaled by 2^-53, i.e. word / 2^64
  /// truncated to double precision. Never returns 1.0.
  constexpr double uniform(std::uint64_t n) const noexcept {
    return double(word(n) >> 11) * 0x1.0p-53;
  }

  constexpr CounterRng split(std::uint64_t tag) const noexcept {
    return CounterRng(mix64(seed_ ^ mix64(tag + kGolden)));
  }

  constexpr std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace sgm
