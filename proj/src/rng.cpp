#include "svnl/rng.hpp"

namespace svnl {

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  std::uint64_t z = seed;
  for (auto& word : s_) {
    z += 0x9e3779b97f4a7c15ULL;
    word = mix64(z);
  }
}

Xoshiro256pp StreamKey::generator(std::uint64_t attempt) const {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ static_cast<std::uint64_t>(purpose));
  h = mix64(h ^ t);
  h = mix64(h ^ slot);
  h = mix64(h ^ attempt);
  return Xoshiro256pp(h);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) { return seed ^ mix64(tag + 0x5851f42d4c957f2dULL); }

}  // namespace svnl
