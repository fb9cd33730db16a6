#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spatsurv/kernels.hpp"
#include "spatsurv/rng.hpp"

using namespace spatsurv;

namespace {

// Plain reference loops the SIMD lanes must reproduce bit for bit.
void ref_dist2(const std::vector<double>& xs, const std::vector<double>& ys,
               double qx, double qy, std::vector<double>& out) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    out[i] = dx * dx + dy * dy;
  }
}

struct Inputs {
  std::vector<double> xs, ys, v;
  std::vector<std::uint8_t> active;
};

Inputs make_inputs(int n, Rng& rng, double active_rate) {
  Inputs in;
  in.xs.resize(n);
  in.ys.resize(n);
  in.v.resize(n);
  in.active.resize(n);
  for (int i = 0; i < n; ++i) {
    in.xs[i] = rng.uniform() * 40.0 - 20.0;
    in.ys[i] = rng.uniform() * 40.0 - 20.0;
    in.v[i] = rng.uniform() * 100.0;
    in.active[i] = rng.uniform() < active_rate ? 1 : 0;
  }
  return in;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("active backend is available and nameable") {
  const auto b = kern::active_backend();
  CHECK(kern::backend_available(b));
  CHECK(kern::backend_name(b) != nullptr);
  CHECK(kern::backend_available(kern::Backend::scalar));
}

TEST_CASE("dist2_to_point matches the reference loop on every lane") {
  Rng rng(101);
  for (int n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 16, 17, 33, 400}) {
    auto in = make_inputs(n, rng, 1.0);
    std::vector<double> expect(n);
    ref_dist2(in.xs, in.ys, 3.25, -1.5, expect);
    for (auto b : {kern::Backend::scalar, kern::Backend::avx2, kern::Backend::neon}) {
      if (!kern::backend_available(b)) continue;
      kern::set_backend(b);
      std::vector<double> got(n, -1.0);
      kern::dist2_to_point(in.xs, in.ys, 3.25, -1.5, got);
      CHECK(std::memcmp(got.data(), expect.data(), n * sizeof(double)) == 0);
    }
    kern::reset_backend();
  }
}

TEST_CASE("masked_min / masked_argmin agree across lanes and handle edge cases") {
  Rng rng(202);
  for (int n : {0, 1, 3, 8, 13, 64, 257}) {
    for (double rate : {0.0, 0.35, 1.0}) {
      auto in = make_inputs(n, rng, rate);
      // reference
      double best = std::numeric_limits<double>::infinity();
      std::ptrdiff_t arg = -1;
      for (int i = 0; i < n; ++i)
        if (in.active[i] && in.v[i] < best) {
          best = in.v[i];
          arg = i;
        }
      for (auto b : {kern::Backend::scalar, kern::Backend::avx2, kern::Backend::neon}) {
        if (!kern::backend_available(b)) continue;
        kern::set_backend(b);
        const double got = kern::masked_min(in.v, in.active);
        const auto gota = kern::masked_argmin(in.v, in.active);
        if (arg == -1) {
          CHECK(std::isinf(got));
          CHECK(gota == -1);
        } else {
          CHECK(got == best);
          CHECK(gota == arg);
        }
      }
      kern::reset_backend();
    }
  }
}

TEST_CASE("ties resolve to the lowest active index") {
  std::vector<double> v{5.0, 2.0, 2.0, 2.0, 9.0};
  std::vector<std::uint8_t> active{1, 0, 1, 1, 1};
  for (auto b : {kern::Backend::scalar, kern::Backend::avx2, kern::Backend::neon}) {
    if (!kern::backend_available(b)) continue;
    kern::set_backend(b);
    CHECK(kern::masked_min(v, active) == 2.0);
    CHECK(kern::masked_argmin(v, active) == 2);
  }
  kern::reset_backend();
}

TEST_CASE("forcing an unavailable lane throws") {
  const bool avx2 = kern::backend_available(kern::Backend::avx2);
  const bool neon = kern::backend_available(kern::Backend::neon);
  CHECK(!(avx2 && neon));  // no machine has both
  if (!avx2) CHECK_THROWS_AS(kern::set_backend(kern::Backend::avx2), std::invalid_argument);
  if (!neon) CHECK_THROWS_AS(kern::set_backend(kern::Backend::neon), std::invalid_argument);
  kern::reset_backend();
}

}  // TEST_SUITE
