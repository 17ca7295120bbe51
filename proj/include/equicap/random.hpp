#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include <Eigen/Dense>

namespace equicap {

// SplitMix64 finalizer; used to derive independent substreams from a base
// seed and a counter so results do not depend on scheduling.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(base ^ splitmix64(stream)) + index);
}

// Stream tags for derive_seed.
inline constexpr std::uint64_t kAnchorStream = 1;
inline constexpr std::uint64_t kDichotomyStream = 2;
inline constexpr std::uint64_t kInputStream = 3;
inline constexpr std::uint64_t kFilterStream = 4;
inline constexpr std::uint64_t kInstanceStream = 5;

using Rng = std::mt19937_64;

// rows x cols i.i.d. standard normal entries, filled column by column.
Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

// Worker count from EQUICAP_THREADS, else hardware concurrency (at least 1).
int worker_count();

// Runs body(i) for i in [0, count) on up to `workers` threads. Each index
// is processed exactly once; the first exception is rethrown after all
// workers have joined.
void parallel_for(int count, const std::function<void(int)>& body, int workers = 0);

}  // namespace equicap
