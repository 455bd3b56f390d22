#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace tzclock {

using Engine = std::mt19937_64;

// Purpose tags keep independent consumers of one (point, shot) apart.
enum class StreamPurpose : std::uint32_t {
  laser = 1,
  sites = 2,
  analysis = 3,
  trials = 4,
};

// Every random stream is a pure function of the root seed and a path of
// integer indices, e.g. (seed, experiment, point, shot, purpose). The same
// path always yields the same engine state, independent of evaluation order.
inline Engine derive_stream(std::uint64_t root_seed, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * path.size());
  words.push_back(static_cast<std::uint32_t>(root_seed));
  words.push_back(static_cast<std::uint32_t>(root_seed >> 32));
  for (auto v : path) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

inline double uniform01(Engine& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace tzclock
