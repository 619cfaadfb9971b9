#pragma once

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <cstdint>
#include <random>

namespace fracdiff {

using Engine = boost::random::mt19937_64;

/// Independent substream for (seed, stream). Path i of a Monte-Carlo run uses
/// stream i, so results do not depend on how paths are spread over threads.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
  return Engine(seq);
}

/// Ziggurat standard normal; platform-independent output for a given engine.
class StandardNormal {
 public:
  double operator()(Engine& engine) { return dist_(engine); }

 private:
  boost::random::normal_distribution<double> dist_{0.0, 1.0};
};

inline double uniform(Engine& engine, double lo, double hi) {
  return boost::random::uniform_real_distribution<double>(lo, hi)(engine);
}

}  // namespace fracdiff
