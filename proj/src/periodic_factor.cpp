#include "kdisc/periodic_factor.hpp"

#include <cmath>
#include <numbers>

#include "kdisc/errors.hpp"
#include "kdisc/special.hpp"

namespace kdisc {

namespace {
constexpr double kPi = std::numbers::pi;

// 1 + 2 sum_k c_k cos(2 pi k t) and its t-derivative, harmonics by angle addition.
double theta_series(const std::vector<double>& coef, double t, double* derivative) {
  const double c1 = std::cos(2.0 * kPi * t), s1 = std::sin(2.0 * kPi * t);
  double c = c1, s = s1, sum = 0.0, dsum = 0.0;
  for (std::size_t k = 1; k <= coef.size(); ++k) {
    sum += coef[k - 1] * c;
    dsum += double(k) * coef[k - 1] * s;
    const double cn = c * c1 - s * s1;
    s = s * c1 + c * s1;
    c = cn;
  }
  if (derivative) *derivative = -4.0 * kPi * dsum;
  return 1.0 + 2.0 * sum;
}
}  // namespace

PeriodicFactor PeriodicFactor::make(Family family, double tau, std::optional<double> ratio) {
  if (!(std::isfinite(tau) && tau > 0.0))
    throw ValidationError("periodic factor: tau must be finite and positive");
  PeriodicFactor f;
  f.family = family;
  f.tau = tau;
  switch (family) {
    case Family::Exponential:
      f.amp = 0.5 * tau / std::sinh(0.5 * tau);
      break;
    case Family::Multiquadric:
      f.ratio = ratio.value_or(std::exp(-kPi * tau));
      f.amp = 1.0 - f.ratio * f.ratio;
      break;
    case Family::Gaussian:
      f.ratio = ratio.value_or(std::exp(-kPi * kPi * tau));
      f.terms = theta3_terms(f.ratio);
      for (int k = 1; k <= f.terms; ++k) f.theta_coef.push_back(std::pow(f.ratio, double(k * k)));
      break;
    case Family::Truncated:
      if (tau < 1.0) throw ValidationError("periodic truncated factor needs tau >= 1");
      f.amp = tau;
      break;
  }
  return f;
}

double PeriodicFactor::value(double x) const {
  const double t = wrap_unit(x);
  switch (family) {
    case Family::Exponential:
      return amp * std::cosh(tau * (t - 0.5));
    case Family::Multiquadric: {
      const double q = ratio;
      return amp / (1.0 - 2.0 * q * std::cos(2.0 * kPi * t) + q * q);
    }
    case Family::Gaussian:
      return theta_series(theta_coef, t, nullptr);
    case Family::Truncated: {
      const double a = 1.0 - tau * t, b = 1.0 - tau * (1.0 - t);
      return tau * ((a > 0.0 ? a : 0.0) + (b > 0.0 ? b : 0.0));
    }
  }
  return 0.0;
}

double PeriodicFactor::value_derivative(double x, double& dv) const {
  const double t = wrap_unit(x);
  if (t == 0.0) {
    // chi is even, so the average of the one-sided slopes at the origin is 0.
    dv = 0.0;
    return value(0.0);
  }
  switch (family) {
    case Family::Exponential: {
      const double u = tau * (t - 0.5);
      dv = amp * tau * std::sinh(u);
      return amp * std::cosh(u);
    }
    case Family::Multiquadric: {
      const double q = ratio;
      const double c = std::cos(2.0 * kPi * t), s = std::sin(2.0 * kPi * t);
      const double den = 1.0 - 2.0 * q * c + q * q;
      dv = -amp * 4.0 * kPi * q * s / (den * den);
      return amp / den;
    }
    case Family::Gaussian:
      return theta_series(theta_coef, t, &dv);
    case Family::Truncated: {
      const double a = 1.0 - tau * t, b = 1.0 - tau * (1.0 - t);
      dv = tau * tau * ((b > 0.0 ? 1.0 : 0.0) - (a > 0.0 ? 1.0 : 0.0));
      return tau * ((a > 0.0 ? a : 0.0) + (b > 0.0 ? b : 0.0));
    }
  }
  dv = 0.0;
  return 0.0;
}

}  // namespace kdisc
