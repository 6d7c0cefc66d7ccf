#include "kdisc/special.hpp"

#include <cmath>
#include <numbers>

#include "kdisc/errors.hpp"

namespace kdisc {

namespace {

// Single-precision-grade initial guess (Giles' polynomial approximation).
double erfinv_guess(double x) {
  double w = -std::log((1.0 - x) * (1.0 + x));
  double p;
  if (w < 5.0) {
    w -= 2.5;
    p = 2.81022636e-08;
    p = 3.43273939e-07 + p * w;
    p = -3.5233877e-06 + p * w;
    p = -4.39150654e-06 + p * w;
    p = 0.00021858087 + p * w;
    p = -0.00125372503 + p * w;
    p = -0.00417768164 + p * w;
    p = 0.246640727 + p * w;
    p = 1.50140941 + p * w;
  } else {
    w = std::sqrt(w) - 3.0;
    p = -0.000200214257;
    p = 0.000100950558 + p * w;
    p = 0.00134934322 + p * w;
    p = -0.00367342844 + p * w;
    p = 0.00573950773 + p * w;
    p = -0.0076224613 + p * w;
    p = 0.00943887047 + p * w;
    p = 1.00167406 + p * w;
    p = 2.83297682 + p * w;
  }
  return p * x;
}

}  // namespace

double erfinv(double u) {
  if (!std::isfinite(u) || std::abs(u) >= 1.0) {
    throw ValidationError("erfinv: argument must lie in (-1, 1)");
  }
  if (u == 0.0) return 0.0;
  const double a = std::abs(u);
  double z = erfinv_guess(a);
  const double slope = 2.0 / std::sqrt(std::numbers::pi);
  if (a <= 0.5) {
    for (int it = 0; it < 4; ++it) {
      const double step = (std::erf(z) - a) / (slope * std::exp(-z * z));
      z -= step;
      if (std::abs(step) <= 1e-17 * std::abs(z)) break;
    }
  } else {
    // 1 - a is exact here, so solving erfc(z) = 1 - a keeps full relative accuracy near 1.
    const double tail = 1.0 - a;
    for (int it = 0; it < 6; ++it) {
      const double step = (std::erfc(z) - tail) / (slope * std::exp(-z * z));
      z += step;
      if (std::abs(step) <= 1e-17 * std::abs(z)) break;
    }
  }
  return u < 0.0 ? -z : z;
}

int theta3_terms(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("theta3: nome must lie in (0, 1)");
  int k = 1;
  while (std::pow(q, double((k + 1) * (k + 1))) >= 1e-17) ++k;
  return k;
}

double theta3(double t, double q) {
  const int terms = theta3_terms(q);
  const double c1 = std::cos(2.0 * std::numbers::pi * t);
  const double s1 = std::sin(2.0 * std::numbers::pi * t);
  double c = c1, s = s1, sum = 0.0;
  for (int k = 1; k <= terms; ++k) {
    sum += std::pow(q, double(k * k)) * c;
    const double cn = c * c1 - s * s1;
    s = s * c1 + c * s1;
    c = cn;
  }
  return 1.0 + 2.0 * sum;
}

double theta3_derivative(double t, double q) {
  const int terms = theta3_terms(q);
  const double c1 = std::cos(2.0 * std::numbers::pi * t);
  const double s1 = std::sin(2.0 * std::numbers::pi * t);
  double c = c1, s = s1, sum = 0.0;
  for (int k = 1; k <= terms; ++k) {
    sum += k * std::pow(q, double(k * k)) * s;
    const double cn = c * c1 - s * s1;
    s = s * c1 + c * s1;
    c = cn;
  }
  return -4.0 * std::numbers::pi * sum;
}

double power_tail_sum(double p, long m) {
  if (!(p > 1.0)) throw ValidationError("power_tail_sum: exponent must exceed 1");
  if (m < 0) m = 0;
  double head = 0.0;
  long n = m + 1;
  for (; n < 32; ++n) head += std::pow(double(n), -p);
  // Euler-Maclaurin for sum_{a >= n} a^{-p}.
  const double x = double(n);
  const double f = std::pow(x, -p);
  double tail = x * f / (p - 1.0) + 0.5 * f;
  tail += p * f / (12.0 * x);
  tail -= p * (p + 1) * (p + 2) * f / (720.0 * x * x * x);
  const double x2 = x * x;
  double rising = p * (p + 1) * (p + 2) * (p + 3) * (p + 4);
  double g = f / (x2 * x2 * x);
  tail += rising * g / 30240.0;
  rising *= (p + 5) * (p + 6);
  g /= x2;
  tail -= rising * g / 1209600.0;
  rising *= (p + 7) * (p + 8);
  g /= x2;
  tail += rising * g / 47900160.0;
  return head + tail;
}

}  // namespace kdisc
