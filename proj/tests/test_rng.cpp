#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "spatsurv/rng.hpp"

using namespace spatsurv;

TEST_SUITE("rng") {

TEST_CASE("same seed reproduces the stream, different seeds diverge") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    all_equal &= (x == b.next_u64());
    any_diff |= (x != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform stays in [0,1) and covers the range") {
  Rng rng(7);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
  CHECK(std::abs(sum / n - 0.5) < 0.005);  // 4 sigma ~ 0.0037
}

TEST_CASE("uniform_int hits both ends and nothing outside") {
  Rng rng(11);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform_int(-2, 3);
    CHECK(v >= -2);
    CHECK(v <= 3);
    seen.insert(v);
  }
  CHECK(seen.size() == 6);
  CHECK(rng.uniform_int(5, 5) == 5);
}

TEST_CASE("normal has the right first two moments") {
  Rng rng(19);
  const int n = 100000;
  double sum = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    ss += z * z;
  }
  const double mean = sum / n;
  const double var = ss / n - mean * mean;
  CHECK(std::abs(mean) < 0.015);      // 4 sigma ~ 0.0126
  CHECK(std::abs(var - 1.0) < 0.03);  // se(var) ~ sqrt(2/n)
}

TEST_CASE("poisson matches its mean and degenerates at zero") {
  Rng rng(23);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.poisson(3.0);
  CHECK(std::abs(sum / n - 3.0) < 0.03);  // 4 sigma ~ 0.022
  for (int i = 0; i < 100; ++i) CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("sample_without_replacement basics") {
  Rng rng(5);
  SUBCASE("k >= n returns everything, sorted") {
    const auto all = sample_without_replacement(4, 4, rng);
    CHECK(all == std::vector<int>{0, 1, 2, 3});
    const auto more = sample_without_replacement(4, 9, rng);
    CHECK(more == std::vector<int>{0, 1, 2, 3});
  }
  SUBCASE("draws are distinct, sorted and in range") {
    for (int rep = 0; rep < 200; ++rep) {
      const auto s = sample_without_replacement(10, 3, rng);
      REQUIRE(s.size() == 3);
      CHECK(std::is_sorted(s.begin(), s.end()));
      CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
      CHECK(s.front() >= 0);
      CHECK(s.back() < 10);
    }
  }
  SUBCASE("single-index inclusion is uniform") {
    const int reps = 20000;
    std::vector<int> hits(10, 0);
    for (int rep = 0; rep < reps; ++rep)
      for (int i : sample_without_replacement(10, 3, rng)) ++hits[i];
    for (int i = 0; i < 10; ++i) {
      const double p = static_cast<double>(hits[i]) / reps;
      CHECK(std::abs(p - 0.3) < 0.013);  // 4 sigma binomial
    }
  }
}

TEST_CASE("derive_seed separates stages, indices and masters") {
  const auto base = derive_seed(1u, "mc", 0, 0);
  CHECK(base == derive_seed(1u, "mc", 0, 0));
  CHECK(base != derive_seed(2u, "mc", 0, 0));
  CHECK(base != derive_seed(1u, "mc-screened", 0, 0));
  CHECK(base != derive_seed(1u, "mc", 1, 0));
  CHECK(base != derive_seed(1u, "mc", 0, 1));
  // appending an index is not the same as baking it into the label
  CHECK(derive_seed(1u, "synth") != derive_seed(1u, "synth", 0));
}

}  // TEST_SUITE
