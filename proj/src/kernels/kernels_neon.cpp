// NEON lane (aarch64 baseline). Same operation order as the scalar lane,
// compiled with -ffp-contract=off, so results are bit-identical.
#include <arm_neon.h>

#include <cstdint>
#include <limits>

namespace spatsurv::kern::neon {

void dist2_to_point(const double* xs, const double* ys, std::size_t n,
                    double qx, double qy, double* out) {
  const float64x2_t vqx = vdupq_n_f64(qx);
  const float64x2_t vqy = vdupq_n_f64(qy);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vqx);
    const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vqy);
    const float64x2_t d2 = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
    vst1q_f64(out + i, d2);
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    out[i] = dx * dx + dy * dy;
  }
}

double masked_min(const double* v, const std::uint8_t* active, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  float64x2_t acc = vdupq_n_f64(inf);
  const float64x2_t vinf = vdupq_n_f64(inf);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t lanes = {static_cast<std::uint64_t>(active[i]),
                              static_cast<std::uint64_t>(active[i + 1])};
    const uint64x2_t is_active = vtstq_u64(lanes, lanes);  // all-ones where != 0
    const float64x2_t vals = vbslq_f64(is_active, vld1q_f64(v + i), vinf);
    acc = vminq_f64(acc, vals);
  }
  double best = vminvq_f64(acc);
  for (; i < n; ++i) {
    if (active[i] && v[i] < best) best = v[i];
  }
  return best;
}

}  // namespace spatsurv::kern::neon
