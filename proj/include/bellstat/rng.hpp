#pragma once

#include <cmath>
#include <cstdint>

namespace bellstat {

// Counter-based splittable generator.  Output slot i of stream s under seed k
// is splitmix64(key(k, s) + i * gamma): any (stream, counter) pair can be
// addressed directly, so results never depend on scheduling or worker count.
// Streams with distinct ids are statistically independent.
//
// Consumers that need a fixed layout (the trial simulator) seek to a stride
// boundary before each logical unit of work; one normal() consumes exactly
// two slots, everything else one slot per draw.
class SplitRng {
 public:
  SplitRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(derive_key(seed, stream)) {}

  void seek(std::uint64_t counter) noexcept { counter_ = counter; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t z = key_ + counter_ * kGamma;
    ++counter_;
    return mix(z);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes exactly two counter slots.
  double normal() noexcept {
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t seed,
                                  std::uint64_t stream) noexcept {
    const std::uint64_t a = mix(seed + kGamma);
    return mix(a ^ (stream + 0x6a09e667f3bcc909ULL));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bellstat
