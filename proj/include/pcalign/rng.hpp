#pragma once

#include <cstdint>
#include <random>

namespace pcalign {

/// SplitMix64 finaliser. Used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for the `index`-th draw of the stream `tag` under a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(base) ^ tag) ^ index);
}

// Stream tags keep initialisation, data and batch draws independent.
namespace stream {
inline constexpr std::uint64_t kInit = 0x696e6974ULL;
inline constexpr std::uint64_t kTask = 0x7461736bULL;
inline constexpr std::uint64_t kBatch = 0x62617463ULL;
inline constexpr std::uint64_t kTarget = 0x74617267ULL;
inline constexpr std::uint64_t kShuffle = 0x73687566ULL;
}  // namespace stream

/// std::mt19937_64 (bit-exact by the standard) with hand-written
/// uniform and normal transforms, so draws do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via the Marsaglia polar method.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pcalign
