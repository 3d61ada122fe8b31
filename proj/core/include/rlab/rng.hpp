#pragma once

#include <cstdint>
#include <span>

namespace rlab {

// Deterministic 64-bit generator (splitmix64). We own the generator and the
// sampling code so results are bit-identical across platforms and standard
// library versions; std::discrete_distribution makes no such promise.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Inverse-CDF draw from a probability vector. The last positive entry
  // absorbs rounding slack so the draw always lands in-support.
  int sample(std::span<const double> probs) {
    const double u = next_double();
    double acc = 0.0;
    int last_positive = 0;
    for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
      if (probs[i] > 0.0) last_positive = i;
      acc += probs[i];
      if (u < acc) return i;
    }
    return last_positive;
  }

  // Uniform integer in [0, n).
  int next_below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

 private:
  std::uint64_t state_;
};

// Documented stream-splitting rule: substream k of master seed s is seeded
// with splitmix64 applied to (s XOR golden-ratio-scrambled k). Used to give
//each trajectory / evaluation episode its own independent stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  Rng mix(master ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  return mix.next_u64();
}

}  // namespace rlab
