// NEON variants for AArch64, where Advanced SIMD is part of the baseline.

#include "wavemap/kernels.hpp"

#if defined(__aarch64__)
#define WAVEMAP_HAVE_NEON 1
#include <arm_neon.h>

#include <cmath>
#include <limits>
#endif

namespace wavemap::kernels {

#if WAVEMAP_HAVE_NEON

namespace {

void acceleration_neon(const double* u, const double* sin2u, StencilCoefficients c, double* out,
                       std::size_t begin, std::size_t end) {
  std::size_t i = begin;
  for (; i + 2 <= end; i += 2) {
    const float64x2_t um = vld1q_f64(u + i - 1);
    const float64x2_t u0 = vld1q_f64(u + i);
    const float64x2_t up = vld1q_f64(u + i + 1);
    const float64x2_t fwd = vmulq_f64(vld1q_f64(c.plus + i), vsubq_f64(up, u0));
    const float64x2_t bwd = vmulq_f64(vld1q_f64(c.minus + i), vsubq_f64(u0, um));
    const float64x2_t src = vmulq_f64(vld1q_f64(c.source + i), vld1q_f64(sin2u + i));
    vst1q_f64(out + i, vsubq_f64(vsubq_f64(fwd, bwd), src));
  }
  for (; i < end; ++i) {
    const double fwd = c.plus[i] * (u[i + 1] - u[i]);
    const double bwd = c.minus[i] * (u[i] - u[i - 1]);
    out[i] = (fwd - bwd) - c.source[i] * sin2u[i];
  }
}

void axpy_neon(double* y, const double* x, double a, std::size_t begin, std::size_t end) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = begin;
  for (; i + 2 <= end; i += 2) {
    // vmulq + vaddq rather than vfmaq: keeps rounding identical to scalar
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < end; ++i) y[i] = y[i] + a * x[i];
}

double max_abs_neon(const double* x, std::size_t begin, std::size_t end) {
  const float64x2_t big = vdupq_n_f64(std::numeric_limits<double>::max());
  float64x2_t vmax = vdupq_n_f64(0.0);
  uint64x2_t ok = vdupq_n_u64(~0ULL);
  std::size_t i = begin;
  for (; i + 2 <= end; i += 2) {
    const float64x2_t a = vabsq_f64(vld1q_f64(x + i));
    ok = vandq_u64(ok, vcleq_f64(a, big));
    vmax = vmaxnmq_f64(vmax, a);
  }
  bool bad = (vgetq_lane_u64(ok, 0) & vgetq_lane_u64(ok, 1)) != ~0ULL;
  double m = vmaxnmvq_f64(vmax);
  for (; i < end; ++i) {
    const double a = std::fabs(x[i]);
    if (!(a <= std::numeric_limits<double>::max())) bad = true;
    m = m < a ? a : m;
  }
  return bad ? std::numeric_limits<double>::quiet_NaN() : m;
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{Isa::Neon, &acceleration_neon, &axpy_neon, &max_abs_neon};
  return &table;
}

#else

const KernelTable* neon_table() { return nullptr; }

#endif

}  // namespace wavemap::kernels
