#pragma once

#include "grw/kernels/kernels.hpp"

namespace grw::kernels::detail {

extern const KernelTable scalar_table;

#if defined(GRW_HAVE_AVX2_TU)
extern const KernelTable avx2_table;
#endif

}  // namespace grw::kernels::detail
