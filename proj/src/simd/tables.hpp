#pragma once

// Per-ISA kernel tables. The vector translation units are compiled with
// their own target flags and must not instantiate shared inline templates.

#include "pdpp/simd.hpp"

namespace pdpp::simd::detail {

extern const KernelTable scalar_table;

#if defined(PDPP_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif

#if defined(PDPP_HAVE_NEON)
extern const KernelTable neon_table;
#endif

}  // namespace pdpp::simd::detail
