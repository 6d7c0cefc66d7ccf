#pragma once

// Per-ISA entry points behind kdisc/simd/pair_sum.hpp. `grad` may be null for
// the value-only sum; when present it has d * n entries and is overwritten.

#include <cstddef>

#include "kdisc/periodic_factor.hpp"

namespace kdisc::simd::detail {

double pair_sum_scalar(const PeriodicFactor& chi, const double* coords, std::size_t n, std::size_t d,
                       double* grad);

#if defined(KDISC_HAVE_AVX2)
double pair_sum_avx2(const PeriodicFactor& chi, const double* coords, std::size_t n, std::size_t d,
                     double* grad);
#endif

}  // namespace kdisc::simd::detail
