#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace toolexpander {

// Stream purposes; keep values stable, they feed the seed derivation.
enum class StreamPurpose : std::uint64_t {
  Classify = 1,
  RolloutRaw = 2,
  RolloutGuided = 3,
  Vetting = 4,
  Donors = 5,
  Fixture = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed for the per-sample stream keyed by (seed, round, sample id, purpose).
/// Independent of evaluation order, so fan-out across workers is reproducible.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t round, std::string_view sample_id,
                                 StreamPurpose purpose, std::uint64_t salt = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ round);
  h = splitmix64(h ^ fnv1a(sample_id));
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  return splitmix64(h ^ salt);
}

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t seed, std::uint64_t round, std::string_view sample_id,
                       StreamPurpose purpose, std::uint64_t salt = 0) {
  return Rng(stream_seed(seed, round, sample_id, purpose, salt));
}

// The std distributions are implementation-defined; these two are not, so
// seeded runs agree across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

}  // namespace toolexpander
