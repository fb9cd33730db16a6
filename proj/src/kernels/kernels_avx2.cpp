// AVX2 lane. Compiled with -mavx2 -ffp-contract=off; only entered when the
// CPU reports AVX2 support. Each loop has a vector body plus a scalar tail
// that performs the identical mul/add/min sequence.
#include <immintrin.h>

#include <cstdint>
#include <cstring>
#include <limits>

namespace spatsurv::kern::avx2 {

bool supported() {
#if defined(__GNUC__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

void dist2_to_point(const double* xs, const double* ys, std::size_t n,
                    double qx, double qy, double* out) {
  const __m256d vqx = _mm256_set1_pd(qx);
  const __m256d vqy = _mm256_set1_pd(qy);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vqx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vqy);
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    _mm256_storeu_pd(out + i, d2);
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    out[i] = dx * dx + dy * dy;
  }
}

double masked_min(const double* v, const std::uint8_t* active, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  __m256d acc = _mm256_set1_pd(inf);
  const __m256i zero = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    std::uint32_t m4;
    std::memcpy(&m4, active + i, 4);
    const __m256i lanes = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(static_cast<int>(m4)));
    // all-ones where the entry is inactive
    const __m256d inactive = _mm256_castsi256_pd(_mm256_cmpeq_epi64(lanes, zero));
    const __m256d vals = _mm256_blendv_pd(_mm256_loadu_pd(v + i), _mm256_set1_pd(inf), inactive);
    acc = _mm256_min_pd(acc, vals);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double best = lanes[0];
  if (lanes[1] < best) best = lanes[1];
  if (lanes[2] < best) best = lanes[2];
  if (lanes[3] < best) best = lanes[3];
  for (; i < n; ++i) {
    if (active[i] && v[i] < best) best = v[i];
  }
  return best;
}

}  // namespace spatsurv::kern::avx2
