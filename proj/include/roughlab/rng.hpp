#pragma once

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <span>

namespace roughlab {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Child seed for an indexed sub-experiment (replication, outer path, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                                 std::uint64_t tag = 0) noexcept {
  return splitmix64(splitmix64(seed ^ splitmix64(tag)) + index);
}

// Independent normal stream for one Monte Carlo path: 64-bit Mersenne
// Twister seeded by a splitmix64 hash of (seed, path), Boost ziggurat normals.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path)
      : engine_(splitmix64(splitmix64(seed) + path)) {}

  double normal() { return normal_(engine_); }

  void fill(std::span<double> out) {
    for (double& z : out) z = normal_(engine_);
  }

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace roughlab
