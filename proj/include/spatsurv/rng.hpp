#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace spatsurv {

// Deterministic RNG used throughout the library. The distributions are
// hand-rolled on top of mt19937_64 so that draws do not depend on the
// standard library implementation: a (config, seed) pair must reproduce
// the same stream everywhere.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], both ends inclusive. Unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal, Marsaglia polar method.
  double normal();

  // Poisson by inversion-by-multiplication; fine for the small means
  // used here (meeting counts and sizes).
  int poisson(double mean);

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// `k` distinct indices drawn uniformly from {0, ..., n-1} (Floyd's
// algorithm), returned sorted. k >= n returns all of them.
std::vector<int> sample_without_replacement(int n, int k, Rng& rng);

namespace detail {
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_label(std::uint64_t h, std::string_view label);
}  // namespace detail

// Stable seed derivation: folds a stage label and any number of integer
// indices into the master seed so independent stages (population synthesis,
// epidemic days, Monte Carlo replicates, ...) get independent streams.
template <class... Ix>
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, Ix... idx) {
  std::uint64_t h = detail::splitmix64(master ^ 0x5851f42d4c957f2dULL);
  h = detail::hash_label(h, stage);
  ((h = detail::splitmix64(h ^ static_cast<std::uint64_t>(idx))), ...);
  return detail::splitmix64(h);
}

}  // namespace spatsurv
