#ifndef BILATERAL_RNG_HPP
#define BILATERAL_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace bilateral {

// Random streams, version 1.
//
// Engine: std::mt19937_64 (its output sequence is fixed by the standard, so
// it is identical across standard libraries). Conversions to doubles and
// bounded integers are done here instead of through <random> distributions,
// whose algorithms are implementation-defined.
//
// Stream splitting: a child seed is splitmix64(parent ^ fnv1a64(name)),
// optionally mixed with an index. Episodes split their master seed into the
// named streams "adversary", "learner" and "estimator".
inline constexpr int kRngVersion = 1;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view name) {
  return splitmix64(parent ^ fnv1a64(name));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view name,
                                    std::uint64_t index) {
  return splitmix64(derive_seed(parent, name) + splitmix64(index));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  void reseed(std::uint64_t seed) { engine_.seed(seed); }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, 1], both endpoints reachable.
  double uniform_closed() {
    return static_cast<double>(engine_() >> 11) / 9007199254740991.0;
  }

  // Uniform in [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n), n > 0. Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

// Per-episode seed bundle derived from one master seed.
struct EpisodeSeeds {
  std::uint64_t adversary = 0;
  std::uint64_t learner = 0;
  std::uint64_t estimator = 0;

  static EpisodeSeeds from_master(std::uint64_t master) {
    return {derive_seed(master, "adversary"), derive_seed(master, "learner"),
            derive_seed(master, "estimator")};
  }
};

}  // namespace bilateral

#endif  // BILATERAL_RNG_HPP
