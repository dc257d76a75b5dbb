#include <algorithm>
#include <cmath>
#include <limits>

#include "wavemap/kernels.hpp"

namespace wavemap::kernels {

namespace {

void acceleration_scalar(const double* u, const double* sin2u, StencilCoefficients c, double* out,
                         std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end; ++i) {
    const double fwd = c.plus[i] * (u[i + 1] - u[i]);
    const double bwd = c.minus[i] * (u[i] - u[i - 1]);
    out[i] = (fwd - bwd) - c.source[i] * sin2u[i];
  }
}

void axpy_scalar(double* y, const double* x, double a, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end; ++i) y[i] = y[i] + a * x[i];
}

double max_abs_scalar(const double* x, std::size_t begin, std::size_t end) {
  double m = 0.0;
  bool finite = true;
  for (std::size_t i = begin; i < end; ++i) {
    const double a = std::fabs(x[i]);
    finite = finite && (a <= std::numeric_limits<double>::max());
    m = std::max(m, a);
  }
  return finite ? m : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar, &acceleration_scalar, &axpy_scalar, &max_abs_scalar};
  return table;
}

void sin_double_angle(std::span<const double> u, std::span<double> out, std::size_t begin,
                      std::size_t end) {
  for (std::size_t i = begin; i < end; ++i) out[i] = std::sin(2.0 * u[i]);
}

}  // namespace wavemap::kernels
