#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Small SIMD kernel layer for the sampling hot loops. The local pivotal
// and local cube draws scan squared distances over all undecided units at
// every step, which dominates the Monte Carlo runtime; everything else in
// the library is cold by comparison.
//
// Lanes are selected at runtime (AVX2 on x86-64, NEON on aarch64, scalar
// fallback everywhere). All lanes are compiled without FP contraction and
// use only mul/add/min, so results are bit-identical across lanes; the
// selected lane can never change the output of a run.
namespace spatsurv::kern {

enum class Backend { scalar, avx2, neon };

const char* backend_name(Backend b);
bool backend_available(Backend b);
Backend active_backend();
// Force a specific lane (used by the equivalence tests). Throws
// std::invalid_argument if the lane is not available on this machine.
void set_backend(Backend b);
void reset_backend();  // back to best available

// out[i] = (xs[i] - qx)^2 + (ys[i] - qy)^2
void dist2_to_point(std::span<const double> xs, std::span<const double> ys,
                    double qx, double qy, std::span<double> out);

// Minimum of v[i] over entries with active[i] != 0; +infinity when no
// entry is active.
double masked_min(std::span<const double> v, std::span<const std::uint8_t> active);

// Lowest active index attaining masked_min; -1 when no entry is active.
std::ptrdiff_t masked_argmin(std::span<const double> v, std::span<const std::uint8_t> active);

}  // namespace spatsurv::kern
