#pragma once

// Data-parallel inner loops of the evolution: the radial operator stencil,
// kick/drift updates and the overshoot scan.
//
// Every kernel has a scalar reference and a vector variant. The vector
// variants use the same operation order and no fused multiply-add, so they
// produce results bit-identical to the scalar reference. The active variant is
// chosen once at startup from the host CPU and can be forced with the
// WAVEMAP_SIMD environment variable ("scalar", "avx2", "neon").

#include <cstddef>
#include <span>
#include <string_view>

namespace wavemap::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

/// Per-level stencil coefficients: for interior node i (r_i = i h)
///   plus[i]   = (i + 1/2) / (i h^2)
///   minus[i]  = (i - 1/2) / (i h^2)
///   source[i] = 1 / (2 r_i^2)
/// Entry 0 is unused and kept at zero.
struct StencilCoefficients {
  const double* plus;
  const double* minus;
  const double* source;
};

/// Function table for one instruction set.
struct KernelTable {
  Isa isa;

  /// out[i] = plus[i](u[i+1]-u[i]) - minus[i](u[i]-u[i-1]) - source[i] * sin2u[i]
  /// for i in [begin, end). Requires 1 <= begin and end + 1 <= size of u.
  void (*acceleration)(const double* u, const double* sin2u, StencilCoefficients c,
                       double* out, std::size_t begin, std::size_t end);

  /// y[i] += a * x[i] for i in [begin, end).
  void (*axpy)(double* y, const double* x, double a, std::size_t begin, std::size_t end);

  /// max |x[i]| for i in [begin, end); 0 for an empty range, NaN when any
  /// element is NaN or infinite.
  double (*max_abs)(const double* x, std::size_t begin, std::size_t end);
};

const KernelTable& scalar_table();

/// Vector tables compiled into this binary; null when the ISA is not built.
const KernelTable* avx2_table();
const KernelTable* neon_table();

bool host_supports(Isa isa);

/// The table used by the evolver. Selected on first call.
const KernelTable& active();

/// Overrides the active table (tests and benchmarks). Throws when the host
/// cannot run the requested ISA.
void select(Isa isa);

/// sin(2 u[i]) for i in [begin, end). Shared by all variants; libm has no
/// portable vector sine.
void sin_double_angle(std::span<const double> u, std::span<double> out, std::size_t begin,
                      std::size_t end);

}  // namespace wavemap::kernels
