#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "kdisc/kernels.hpp"
#include "kdisc/pointset.hpp"
#include "kdisc/rkhs.hpp"

namespace kdisc {

enum class Method { Physical, PeriodicClosedForm, Spectral, Asymptotic };

std::string_view method_name(Method m);

/// A discrepancy value with the metadata needed to reproduce it.
struct DiscrepancyReport {
  double value = 0.0;          // sqrt(max(squared_value, 0))
  double squared_value = 0.0;  // before clamping
  Method method = Method::Physical;
  std::string kernel;
  std::size_t n = 0;
  std::size_t d = 0;
  NormParams norm_params;

  // Monte-Carlo integrals.
  std::optional<std::size_t> mc_samples;
  std::optional<std::uint32_t> mc_seed;
  std::optional<double> squared_standard_error;  // of squared_value
  std::optional<double> standard_error;          // of value, by the delta method

  // Spectral series.
  std::optional<double> head_value;        // weighted sum over the truncation box
  std::optional<double> tail_correction;   // estimate of the complement (p' = 2)
  std::optional<double> truncation_bound;  // worst-case bound on the complement
};

struct ExactIntegrals {};

/// Integrals by sampling: the double integral from `samples` uniform pairs and
/// every single integral from one shared sample set (common random numbers).
struct MonteCarloIntegrals {
  std::size_t samples = std::size_t{1} << 16;
  std::uint32_t seed = 0;
};

using IntegralMode = std::variant<ExactIntegrals, MonteCarloIntegrals>;

/// E^2 = iint K + (1/N^2) sum_{n,m} K(y^n, y^m) - (2/N) sum_n int K(., y^n).
/// Exact mode needs closed-form integrals (periodic, spline and their tensor /
/// sum nodes) and throws UnsupportedMethod otherwise.
DiscrepancyReport physical_error(const KernelSpec& spec, const PointSet& y,
                                 const IntegralMode& integrals = ExactIntegrals{});

/// E^2 = (1/N^2) sum_{n,m} K(y^n, y^m) - 1 for a periodic kernel.
DiscrepancyReport periodic_error(const KernelSpec& spec, const PointSet& y);

/// Lattice form of the (s, p) error of a periodic kernel:
///   (sum_{alpha != 0} rho(alpha)^{s p'/2} |(1/N) sum_n e^{2 i pi <y^n, alpha>}|^{p'})^{1/p'}
/// over the first `terms` nonzero enumerated indices (default 10 N). Every
/// exponential mean has modulus <= 1, so the remaining weight mass is reported
/// as truncation_bound on the p'-th power sum. At s = 1, p = 2 the full series
/// is the squared periodic_error.
DiscrepancyReport periodic_error(const KernelSpec& spec, const PointSet& y, const NormParams& params,
                                 std::size_t terms = 0);

/// (sum_alpha lambda_alpha^{s p'/2} |c_alpha|^{p'})^{1/p'} for the spline kernel's
/// eigenbasis, c_alpha = int zeta_alpha - (1/N) sum_n zeta_alpha(y^n), over the
/// box 1 <= alpha_d <= max_index. For p' = 2 the complement of the box is added
/// as tail_correction (mean-square aliasing 1/N per coefficient plus the exact
/// integral part). p = 1 (p' infinite) takes the max over the box. Throws
/// ValidationError when the series diverges (s p' <= 1).
DiscrepancyReport spectral_error(const PointSet& y, const NormParams& params, std::size_t max_index);

/// sqrt(tail_mass(N) / N) for a periodic kernel.
DiscrepancyReport asymptotic_error(const KernelSpec& spec, std::size_t n);

/// Truncated Fourier-series form of the squared periodic error,
/// sum_{0 < max|alpha_d| <= M} rho(alpha) |(1/N) sum_n e^{2 i pi <y^n, alpha>}|^2.
/// Dense over the box, so meant for D <= 2 cross-checks.
double fourier_error_squared(const KernelSpec& spec, const PointSet& y, long max_index);

}  // namespace kdisc
