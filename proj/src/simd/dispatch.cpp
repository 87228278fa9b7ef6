#include "tables.hpp"

#include <atomic>

#include "pdpp/error.hpp"

namespace pdpp::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(PDPP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return &detail::scalar_table;
    case Isa::avx2:
#if defined(PDPP_HAVE_AVX2)
      return cpu_has_avx2() ? &detail::avx2_table : nullptr;
#else
      return nullptr;
#endif
    case Isa::neon:
#if defined(PDPP_HAVE_NEON)
      return &detail::neon_table;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::atomic<const KernelTable*>& active() noexcept {
  static std::atomic<const KernelTable*> table{table_for(detected_isa())};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

Isa detected_isa() noexcept {
  if (table_for(Isa::avx2) != nullptr) return Isa::avx2;
  if (table_for(Isa::neon) != nullptr) return Isa::neon;
  return Isa::scalar;
}

bool isa_available(Isa isa) noexcept { return table_for(isa) != nullptr; }

const KernelTable& kernels_for(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (t == nullptr) {
    throw InvalidInput("SIMD variant '" + std::string(isa_name(isa)) +
                       "' is not available on this machine");
  }
  return *t;
}

const KernelTable& kernels() noexcept {
  return *active().load(std::memory_order_acquire);
}

void set_active_isa(Isa isa) {
  active().store(&kernels_for(isa), std::memory_order_release);
}

ScopedIsa::ScopedIsa(Isa isa) : previous_(kernels().isa) { set_active_isa(isa); }

ScopedIsa::~ScopedIsa() { set_active_isa(previous_); }

}  // namespace pdpp::simd
