// AVX2 variants. Built with per-function target attributes so the rest of the
// library stays baseline x86-64; only reached after a cpuid check.

#include "wavemap/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define WAVEMAP_HAVE_AVX2 1
#include <immintrin.h>

#include <cmath>
#include <limits>
#endif

namespace wavemap::kernels {

#if WAVEMAP_HAVE_AVX2

namespace {

#define WAVEMAP_AVX2 __attribute__((target("avx2")))

WAVEMAP_AVX2 void acceleration_avx2(const double* u, const double* sin2u, StencilCoefficients c,
                                    double* out, std::size_t begin, std::size_t end) {
  std::size_t i = begin;
  for (; i + 4 <= end; i += 4) {
    const __m256d um = _mm256_loadu_pd(u + i - 1);
    const __m256d u0 = _mm256_loadu_pd(u + i);
    const __m256d up = _mm256_loadu_pd(u + i + 1);
    const __m256d fwd = _mm256_mul_pd(_mm256_loadu_pd(c.plus + i), _mm256_sub_pd(up, u0));
    const __m256d bwd = _mm256_mul_pd(_mm256_loadu_pd(c.minus + i), _mm256_sub_pd(u0, um));
    const __m256d src = _mm256_mul_pd(_mm256_loadu_pd(c.source + i), _mm256_loadu_pd(sin2u + i));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_sub_pd(fwd, bwd), src));
  }
  for (; i < end; ++i) {
    const double fwd = c.plus[i] * (u[i + 1] - u[i]);
    const double bwd = c.minus[i] * (u[i] - u[i - 1]);
    out[i] = (fwd - bwd) - c.source[i] * sin2u[i];
  }
}

WAVEMAP_AVX2 void axpy_avx2(double* y, const double* x, double a, std::size_t begin,
                            std::size_t end) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = begin;
  for (; i + 4 <= end; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < end; ++i) y[i] = y[i] + a * x[i];
}

WAVEMAP_AVX2 double max_abs_avx2(const double* x, std::size_t begin, std::size_t end) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d big = _mm256_set1_pd(std::numeric_limits<double>::max());
  __m256d vmax = _mm256_setzero_pd();
  int bad = 0;
  std::size_t i = begin;
  for (; i + 4 <= end; i += 4) {
    const __m256d a = _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i));
    // ordered compare is false for NaN
    bad |= _mm256_movemask_pd(_mm256_cmp_pd(a, big, _CMP_LE_OQ)) ^ 0xF;
    vmax = _mm256_max_pd(vmax, a);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vmax);
  double m = lanes[0];
  for (int k = 1; k < 4; ++k) m = m < lanes[k] ? lanes[k] : m;
  for (; i < end; ++i) {
    const double a = std::fabs(x[i]);
    if (!(a <= std::numeric_limits<double>::max())) bad = 1;
    m = m < a ? a : m;
  }
  return bad ? std::numeric_limits<double>::quiet_NaN() : m;
}

#undef WAVEMAP_AVX2

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Isa::Avx2, &acceleration_avx2, &axpy_avx2, &max_abs_avx2};
  return &table;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace wavemap::kernels
