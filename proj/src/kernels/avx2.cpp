// Compiled with -mavx2. Keep this translation unit free of inline library
// templates so no AVX2 code leaks into shared COMDAT sections.
#include "aeromap/kernels.hpp"

#include <immintrin.h>

namespace aeromap::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

void clip_max_accumulate_avx2(double* agg, const double* mf, std::size_t n, double clip) {
  const __m256d vclip = _mm256_set1_pd(clip);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // Operand order matches the scalar ternaries, including NaN behavior.
    const __m256d m = _mm256_loadu_pd(mf + i);
    const __m256d clipped = _mm256_min_pd(m, vclip);
    const __m256d a = _mm256_loadu_pd(agg + i);
    _mm256_storeu_pd(agg + i, _mm256_max_pd(a, clipped));
  }
  for (; i < n; ++i) {
    const double clipped = mf[i] < clip ? mf[i] : clip;
    agg[i] = agg[i] > clipped ? agg[i] : clipped;
  }
}

WeightedSums weighted_sums_avx2(const double* z, const double* w, std::size_t n) {
  __m256d acc_zw = _mm256_setzero_pd();
  __m256d acc_w = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vz = _mm256_loadu_pd(z + i);
    const __m256d vw = _mm256_loadu_pd(w + i);
    acc_zw = _mm256_add_pd(acc_zw, _mm256_mul_pd(vz, vw));
    acc_w = _mm256_add_pd(acc_w, vw);
  }
  WeightedSums s{hsum(acc_zw), hsum(acc_w)};
  for (; i < n; ++i) {
    s.weighted += z[i] * w[i];
    s.total += w[i];
  }
  return s;
}

double sum_avx2(const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(v + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += v[i];
  return s;
}

CrossSums centered_cross_sums_avx2(const double* xs, const double* ys, std::size_t n,
                                   double mx, double my) {
  const __m256d vmx = _mm256_set1_pd(mx);
  const __m256d vmy = _mm256_set1_pd(my);
  __m256d acc_xx = _mm256_setzero_pd();
  __m256d acc_xy = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vmx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vmy);
    acc_xx = _mm256_add_pd(acc_xx, _mm256_mul_pd(dx, dx));
    acc_xy = _mm256_add_pd(acc_xy, _mm256_mul_pd(dx, dy));
  }
  CrossSums s{hsum(acc_xx), hsum(acc_xy)};
  for (; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    s.sxx += dx * dx;
    s.sxy += dx * dy;
  }
  return s;
}

void squared_distances_avx2(const double* xs, const double* ys, std::size_t n, double qx,
                            double qy, double* out) {
  const __m256d vqx = _mm256_set1_pd(qx);
  const __m256d vqy = _mm256_set1_pd(qy);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vqx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vqy);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    out[i] = dx * dx + dy * dy;
  }
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{
    Isa::avx2,
    clip_max_accumulate_avx2,
    weighted_sums_avx2,
    sum_avx2,
    centered_cross_sums_avx2,
    squared_distances_avx2,
};
}  // namespace detail

}  // namespace aeromap::kernels
