#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "kdisc/periodic_factor.hpp"

namespace kdisc::simd {

/// Instruction-set variants of the periodic pair-sum kernels. The scalar
/// variant is the reference; the others must agree with it to ~1e-13 relative.
enum class Isa { Scalar, Avx2 };

/// True when the variant was compiled in and the running CPU supports it.
bool isa_available(Isa isa) noexcept;

/// Best available variant. Setting the environment variable KDISC_SIMD=scalar
/// forces the reference path (read once, on first call).
Isa active_isa() noexcept;

std::string_view isa_name(Isa isa) noexcept;

/// sum over all ordered pairs (n, m), n == m included, of prod_d chi(y_{n,d} - y_{m,d}).
/// `coords` is dimension-major: coords[d * n + i] is coordinate d of point i.
double periodic_pair_sum(const PeriodicFactor& chi, std::span<const double> coords, std::size_t n,
                         std::size_t d, Isa isa = active_isa());

/// The same sum, plus its gradient with respect to every coordinate, written
/// dimension-major into `grad` (size d * n).
double periodic_pair_sum_gradient(const PeriodicFactor& chi, std::span<const double> coords,
                                  std::size_t n, std::size_t d, std::span<double> grad,
                                  Isa isa = active_isa());

}  // namespace kdisc::simd
