#pragma once

#include <cstdint>
#include <limits>

namespace svnl {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

enum class StreamPurpose : std::uint64_t {
  kInit = 1,
  kPropagate = 2,
  kTheta = 3,
  kResample = 4,
  kSimulate = 5,
  kUser = 6,
};

/// Address of an independent random stream: every (seed, purpose, t, slot)
/// tuple maps to its own generator, so draws never depend on how work is
/// split across threads.
struct StreamKey {
  std::uint64_t seed = 0;
  StreamPurpose purpose = StreamPurpose::kUser;
  std::uint64_t t = 0;
  std::uint64_t slot = 0;

  Xoshiro256pp generator(std::uint64_t attempt = 0) const;
};

/// Child seed for a tagged sub-experiment; distinct tags give unrelated streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace svnl
