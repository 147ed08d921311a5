#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fsr {

/// SplitMix64 avalanche step; used for seeding and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Domain tags keep derived streams disjoint across uses of one master seed.
enum class StreamDomain : std::uint64_t {
  dataset = 0x64617461736574ULL,      // per-replication data generation
  chain = 0x636861696E00ULL,          // per-bootstrap-chain multipliers
  scratch = 0x73637261746368ULL,      // tests and ad-hoc draws
};

/**
 * Derives an independent stream seed as a pure function of
 * (master seed, domain, index); the parallelization dimension is therefore
 * reproducibility-neutral.
 */
inline std::uint64_t derive_stream_seed(std::uint64_t master, StreamDomain domain,
                                        std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s = h ^ static_cast<std::uint64_t>(domain);
  h = splitmix64(s);
  s = h ^ index;
  return splitmix64(s);
}

/**
 * xoshiro256++ with explicit, snapshot-friendly state.
 *
 * <random> engines are not bit-stable across standard libraries and their
 * distribution objects hide state; the determinism and stop/resume contracts
 * need exact, versionable streams, so the generator is pinned here.
 */
class Rng {
 public:
  Rng() : Rng(0) {}

  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
    spare_valid_ = false;
    spare_ = 0.0;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the spare is cached (and snapshotted).
  double normal() {
    if (spare_valid_) {
      spare_valid_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = radius * std::sin(angle);
    spare_valid_ = true;
    return radius * std::cos(angle);
  }

  /// Chi-squared with 3 degrees of freedom: sum of three squared normals.
  double chi_squared_3() {
    const double a = normal(), b = normal(), c = normal();
    return a * a + b * b + c * c;
  }

  /// Rademacher draw: +1 or -1 with equal probability.
  double rademacher() { return (next() >> 63) ? 1.0 : -1.0; }

  // Snapshot access: 4 state words plus the Box-Muller spare.
  const std::array<std::uint64_t, 4>& state() const { return state_; }
  bool spare_valid() const { return spare_valid_; }
  double spare() const { return spare_; }

  void restore(const std::array<std::uint64_t, 4>& state, bool spare_valid,
               double spare) {
    state_ = state;
    spare_valid_ = spare_valid;
    spare_ = spare;
  }

  bool operator==(const Rng& other) const {
    return state_ == other.state_ && spare_valid_ == other.spare_valid_ &&
           (!spare_valid_ || spare_ == other.spare_);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
  bool spare_valid_;
  double spare_;
};

}  // namespace fsr
