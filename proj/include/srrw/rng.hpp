#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace srrw {

// Identity string embedded in every output file. Bump the suffix whenever the
// engine, the seed derivation, or the order of draws in the samplers changes.
inline constexpr std::string_view kRngIdentity = "mt19937_64+splitmix64-split/v1";

/// splitmix64 output finalizer (Steele, Lea & Flood).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a, used to turn cell names into cell ids.
constexpr std::uint64_t hash_name(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed of replica `replica` of cell `cell_id` under `master`:
///   mix64(mix64(mix64(master) ^ cell_id) ^ replica)
/// The result depends only on its three arguments, so replicas can be run in
/// any order or on any number of threads.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t cell_id,
                                   std::uint64_t replica) noexcept {
  return mix64(mix64(mix64(master) ^ cell_id) ^ replica);
}

/// A single random stream. Not thread-safe; give each replica its own.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(mix64(seed)) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1].
  double uniform_pos() noexcept { return 1.0 - uniform(); }

  /// Uniform integer in {0, ..., n-1}; n must be positive.
  std::uint64_t index(std::uint64_t n) {
    return boost::random::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  double normal() { return normal_(engine_); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace srrw
