#pragma once

#include "shampoo/kernels.hpp"

namespace shampoo::kernels::detail {

const KernelTable& scalar_table();

#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
bool cpu_has_avx2();
#endif

#if defined(__aarch64__)
const KernelTable& neon_table();
#endif

}  // namespace shampoo::kernels::detail
