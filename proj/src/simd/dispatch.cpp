#include <cstdlib>
#include <string>
#include <string_view>

#include "kdisc/errors.hpp"
#include "kdisc/simd/pair_sum.hpp"
#include "pair_sum_impl.hpp"

namespace kdisc::simd {

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(KDISC_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() noexcept {
  static const Isa chosen = [] {
    const char* env = std::getenv("KDISC_SIMD");
    if (env && std::string_view(env) == "scalar") return Isa::Scalar;
    return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
  }();
  return chosen;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "?";
}

namespace {

void check(std::span<const double> coords, std::size_t n, std::size_t d, Isa isa) {
  if (n == 0 || d == 0) throw ValidationError("periodic_pair_sum: N and D must be >= 1");
  if (coords.size() != n * d)
    throw ValidationError("periodic_pair_sum: expected " + std::to_string(n * d) + " coordinates");
  if (!isa_available(isa))
    throw ValidationError("periodic_pair_sum: instruction set " + std::string(isa_name(isa)) +
                          " is not available");
}

double run(const PeriodicFactor& chi, const double* y, std::size_t n, std::size_t d, double* grad,
           Isa isa) {
#if defined(KDISC_HAVE_AVX2)
  if (isa == Isa::Avx2) return detail::pair_sum_avx2(chi, y, n, d, grad);
#endif
  (void)isa;
  return detail::pair_sum_scalar(chi, y, n, d, grad);
}

}  // namespace

double periodic_pair_sum(const PeriodicFactor& chi, std::span<const double> coords, std::size_t n,
                         std::size_t d, Isa isa) {
  check(coords, n, d, isa);
  return run(chi, coords.data(), n, d, nullptr, isa);
}

double periodic_pair_sum_gradient(const PeriodicFactor& chi, std::span<const double> coords,
                                  std::size_t n, std::size_t d, std::span<double> grad, Isa isa) {
  check(coords, n, d, isa);
  if (grad.size() != n * d) throw ValidationError("periodic_pair_sum_gradient: gradient buffer has wrong size");
  return run(chi, coords.data(), n, d, grad.data(), isa);
}

}  // namespace kdisc::simd
