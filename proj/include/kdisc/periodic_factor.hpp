#pragma once

#include <optional>
#include <vector>

#include "kdisc/family.hpp"

namespace kdisc {

/// One-dimensional factor chi(t) of a tensor periodic kernel, in closed form,
/// normalized so its Fourier coefficients are the profile r(k) with r(0) = 1:
///
///   exp    chi(t) = (tau/2) cosh(tau (t - 1/2)) / sinh(tau/2)          r(k) = 1/(1 + 4 pi^2 k^2 / tau^2)
///   mq     chi(t) = (1 - q^2) / (1 - 2 q cos(2 pi t) + q^2)             r(k) = q^{|k|}
///   gauss  chi(t) = theta_3(pi t, q)                                    r(k) = q^{k^2}
///   trunc  chi(t) = tau [(1 - tau t)_+ + (1 - tau (1 - t))_+]            r(k) = sinc^2(pi k / tau)
///
/// with t reduced to [0, 1). The reference implementation here is the oracle
/// for the vectorized pair sums.
struct PeriodicFactor {
  Family family = Family::Exponential;
  double tau = 1.0;
  double ratio = 0.0;  // q for mq / gauss
  double amp = 1.0;    // exp: tau / (2 sinh(tau/2)); mq: 1 - q^2; trunc: tau
  int terms = 0;       // gauss: number of theta-series terms
  std::vector<double> theta_coef;  // gauss: q^{k^2}, k = 1..terms

  /// `ratio` overrides exp(-pi tau) (mq) or exp(-pi^2 tau) (gauss).
  static PeriodicFactor make(Family family, double tau, std::optional<double> ratio = std::nullopt);

  /// chi at the fractional part of t.
  double value(double t) const;
  /// chi and chi' at the fractional part of t.
  double value_derivative(double t, double& derivative) const;
  /// chi(0) = sum_k r(k).
  double peak() const { return value(0.0); }
};

/// Fractional part in [0, 1).
inline double wrap_unit(double x) {
  double t = x - __builtin_floor(x);
  return t >= 1.0 ? 0.0 : t;
}

}  // namespace kdisc
