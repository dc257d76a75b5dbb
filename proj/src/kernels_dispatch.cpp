#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "wavemap/kernels.hpp"

namespace wavemap::kernels {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool host_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
      return avx2_table() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon: return neon_table() != nullptr;
  }
  return false;
}

namespace {

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return &scalar_table();
    case Isa::Avx2: return avx2_table();
    case Isa::Neon: return neon_table();
  }
  return nullptr;
}

const KernelTable* detect() {
  if (const char* forced = std::getenv("WAVEMAP_SIMD")) {
    const std::string name(forced);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
      if (name == isa_name(isa) && host_supports(isa)) return table_for(isa);
    }
  }
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (host_supports(isa)) return table_for(isa);
  }
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{detect()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void select(Isa isa) {
  if (!host_supports(isa)) {
    throw std::runtime_error("kernel ISA not available on this host: " +
                             std::string(isa_name(isa)));
  }
  slot().store(table_for(isa), std::memory_order_release);
}

}  // namespace wavemap::kernels
