#include "spatsurv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spatsurv {

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(gen_());  // full 64-bit range
  // Lemire's multiply-shift rejection; exact and branch-light.
  std::uint64_t x = gen_();
  __uint128_t m = static_cast<__uint128_t>(x) * span;
  std::uint64_t l = static_cast<std::uint64_t>(m);
  if (l < span) {
    const std::uint64_t t = (0 - span) % span;
    while (l < t) {
      x = gen_();
      m = static_cast<__uint128_t>(x) * span;
      l = static_cast<std::uint64_t>(m);
    }
  }
  return lo + static_cast<std::int64_t>(m >> 64);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

int Rng::poisson(double mean) {
  if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
  if (mean == 0.0) return 0;
  const double limit = std::exp(-mean);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform();
  } while (p > limit);
  return k - 1;
}

std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
  std::vector<int> picked;
  if (k >= n) {
    picked.resize(n);
    for (int i = 0; i < n; ++i) picked[i] = i;
    return picked;
  }
  picked.reserve(k);
  for (int j = n - k; j < n; ++j) {
    const int t = static_cast<int>(rng.uniform_int(0, j));
    if (std::find(picked.begin(), picked.end(), t) == picked.end())
      picked.push_back(t);
    else
      picked.push_back(j);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

namespace detail {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_label(std::uint64_t h, std::string_view label) {
  // FNV-1a over the label bytes, folded through splitmix.
  std::uint64_t f = 0xcbf29ce484222325ULL;
  for (char c : label) {
    f ^= static_cast<unsigned char>(c);
    f *= 0x100000001b3ULL;
  }
  return splitmix64(h ^ f);
}

}  // namespace detail
}  // namespace spatsurv
