#include "spatsurv/kernels.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace spatsurv::kern {

// ---- scalar reference lane -------------------------------------------------

namespace scalar {

void dist2_to_point(const double* xs, const double* ys, std::size_t n,
                    double qx, double qy, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    out[i] = dx * dx + dy * dy;
  }
}

double masked_min(const double* v, const std::uint8_t* active, std::size_t n) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (active[i] && v[i] < best) best = v[i];
  }
  return best;
}

}  // namespace scalar

// ---- vector lanes, implemented in per-arch translation units ----------------

#if defined(SPATSURV_KERNELS_X86)
namespace avx2 {
void dist2_to_point(const double* xs, const double* ys, std::size_t n,
                    double qx, double qy, double* out);
double masked_min(const double* v, const std::uint8_t* active, std::size_t n);
bool supported();
}  // namespace avx2
#endif

#if defined(SPATSURV_KERNELS_NEON)
namespace neon {
void dist2_to_point(const double* xs, const double* ys, std::size_t n,
                    double qx, double qy, double* out);
double masked_min(const double* v, const std::uint8_t* active, std::size_t n);
}  // namespace neon
#endif

// ---- dispatch ----------------------------------------------------------------

namespace {

using Dist2Fn = void (*)(const double*, const double*, std::size_t, double, double, double*);
using MaskedMinFn = double (*)(const double*, const std::uint8_t*, std::size_t);

struct Table {
  Backend backend;
  Dist2Fn dist2;
  MaskedMinFn masked_min;
};

Table make_table(Backend b) {
  switch (b) {
#if defined(SPATSURV_KERNELS_X86)
    case Backend::avx2:
      return {Backend::avx2, avx2::dist2_to_point, avx2::masked_min};
#endif
#if defined(SPATSURV_KERNELS_NEON)
    case Backend::neon:
      return {Backend::neon, neon::dist2_to_point, neon::masked_min};
#endif
    default:
      return {Backend::scalar, scalar::dist2_to_point, scalar::masked_min};
  }
}

Backend best_available() {
#if defined(SPATSURV_KERNELS_X86)
  if (avx2::supported()) return Backend::avx2;
#endif
#if defined(SPATSURV_KERNELS_NEON)
  return Backend::neon;  // baseline on aarch64
#endif
  return Backend::scalar;
}

Table& table() {
  static Table t = make_table(best_available());
  return t;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
    default: return "scalar";
  }
}

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(SPATSURV_KERNELS_X86)
      return avx2::supported();
#else
      return false;
#endif
    case Backend::neon:
#if defined(SPATSURV_KERNELS_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return table().backend; }

void set_backend(Backend b) {
  if (!backend_available(b))
    throw std::invalid_argument(std::string("kernel backend not available: ") + backend_name(b));
  table() = make_table(b);
}

void reset_backend() { table() = make_table(best_available()); }

void dist2_to_point(std::span<const double> xs, std::span<const double> ys,
                    double qx, double qy, std::span<double> out) {
  if (xs.size() != ys.size() || xs.size() != out.size())
    throw std::invalid_argument("dist2_to_point: size mismatch");
  table().dist2(xs.data(), ys.data(), xs.size(), qx, qy, out.data());
}

double masked_min(std::span<const double> v, std::span<const std::uint8_t> active) {
  if (v.size() != active.size())
    throw std::invalid_argument("masked_min: size mismatch");
  return table().masked_min(v.data(), active.data(), v.size());
}

std::ptrdiff_t masked_argmin(std::span<const double> v, std::span<const std::uint8_t> active) {
  const double m = masked_min(v, active);
  if (m == std::numeric_limits<double>::infinity()) return -1;
  // All lanes produce bit-identical minima, so an exact-equality scan finds
  // the same index regardless of the lane that computed m.
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (active[i] && v[i] == m) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

}  // namespace spatsurv::kern
