#include "kdisc/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "kdisc/errors.hpp"
#include "kdisc/lattice.hpp"
#include "kdisc/sampling.hpp"
#include "kdisc/simd/pair_sum.hpp"
#include "kdisc/special.hpp"
#include "prepared_kernel.hpp"

namespace kdisc {

namespace {

constexpr double kPi = std::numbers::pi;

void check_dims(const KernelSpec& spec, const PointSet& y) {
  if (spec.dim() != y.dim())
    throw ValidationError("kernel " + spec.id() + " has dimension " + std::to_string(spec.dim()) +
                          " but the point set has dimension " + std::to_string(y.dim()));
  if (y.size() == 0) throw ValidationError("empty point set");
}

DiscrepancyReport base_report(const KernelSpec& spec, const PointSet& y, Method m, double squared) {
  DiscrepancyReport r;
  r.squared_value = squared;
  r.value = std::sqrt(std::max(squared, 0.0));
  r.method = m;
  r.kernel = spec.id();
  r.n = y.size();
  r.d = y.dim();
  r.norm_params = NormParams{1.0, 2.0};
  return r;
}

// sum_{n,m} K(y^n, y^m) on prepared coordinates.
double gram_sum(const internal::PreparedKernel& k, std::span<const double> prepared, std::size_t n,
                std::size_t d) {
  double diag = 0.0, off = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = prepared.subspan(i * d, d);
    diag += k(a, a);
    for (std::size_t j = i + 1; j < n; ++j) off += k(a, prepared.subspan(j * d, d));
  }
  return diag + 2.0 * off;
}

double pair_sum(const KernelSpec& spec, const PointSet& y) {
  if (spec.is_periodic()) {
    const auto dm = y.dim_major();
    return simd::periodic_pair_sum(spec.factor(), dm, y.size(), y.dim());
  }
  const internal::PreparedKernel k(spec);
  const auto prepared = k.prepare_all(y.coords());
  return gram_sum(k, prepared, y.size(), y.dim());
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Physical: return "physical";
    case Method::PeriodicClosedForm: return "periodic";
    case Method::Spectral: return "spectral";
    case Method::Asymptotic: return "asymptotic";
  }
  return "?";
}

DiscrepancyReport physical_error(const KernelSpec& spec, const PointSet& y, const IntegralMode& integrals) {
  check_dims(spec, y);
  const std::size_t N = y.size(), D = y.dim();
  const double n = double(N);

  if (std::holds_alternative<ExactIntegrals>(integrals)) {
    const auto dbl = kernel_double_mean(spec);
    if (!dbl)
      throw UnsupportedMethod("kernel " + spec.id() +
                              " has no closed-form integrals; use Monte-Carlo integration");
    double single = 0.0;
    for (std::size_t i = 0; i < N; ++i) single += *kernel_mean(spec, y.point(i));
    const double sq = *dbl + pair_sum(spec, y) / (n * n) - 2.0 * single / n;
    return base_report(spec, y, Method::Physical, sq);
  }

  const auto mc = std::get<MonteCarloIntegrals>(integrals);
  if (mc.samples < 2) throw ValidationError("Monte-Carlo integration needs at least 2 samples");
  const internal::PreparedKernel k(spec);
  const auto py = k.prepare_all(y.coords());
  // Samples 0..S-1 are x_s, S..2S-1 are x'_s.
  const PointSet xs = uniform_points(RngSpec{mc.seed}, 2 * mc.samples, D);
  const auto px = k.prepare_all(xs.coords());
  const std::size_t S = mc.samples;

  // g_s = K(x_s, x'_s) - (2/N) sum_n K(x_s, y^n) has mean iint K - (2/N) sum_n int K.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    const auto a = std::span<const double>(px).subspan(s * D, D);
    const auto b = std::span<const double>(px).subspan((S + s) * D, D);
    double cross = 0.0;
    for (std::size_t i = 0; i < N; ++i) cross += k(a, std::span<const double>(py).subspan(i * D, D));
    const double g = k(a, b) - 2.0 * cross / n;
    if (!std::isfinite(g))
      throw NumericalError("Monte-Carlo integrand not finite at sample " + std::to_string(s));
    const double delta = g - mean;
    mean += delta / double(s + 1);
    m2 += delta * (g - mean);
  }
  const double se2 = std::sqrt(m2 / double(S - 1) / double(S));
  const double sq = mean + gram_sum(k, py, N, D) / (n * n);
  auto r = base_report(spec, y, Method::Physical, sq);
  r.mc_samples = S;
  r.mc_seed = mc.seed;
  r.squared_standard_error = se2;
  // Delta method: d sqrt(v) = dv / (2 sqrt(v)); at v <= 0 fall back to sqrt(se).
  r.standard_error = r.value > 0.0 ? se2 / (2.0 * r.value) : std::sqrt(se2);
  return r;
}

DiscrepancyReport periodic_error(const KernelSpec& spec, const PointSet& y) {
  check_dims(spec, y);
  if (!spec.is_periodic()) throw ValidationError("periodic_error: kernel " + spec.id() + " is not periodic");
  const double n = double(y.size());
  return base_report(spec, y, Method::PeriodicClosedForm, pair_sum(spec, y) / (n * n) - 1.0);
}

namespace {

std::complex<double> exponential_mean(const PointSet& y, const LatticeIndex& alpha) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double phase = 0.0;
    for (const auto& e : alpha.entries()) phase += double(e.value) * y(i, e.dim);
    // Reduce before scaling so large indices keep their accuracy.
    phase -= std::nearbyint(phase);
    re += std::cos(2.0 * kPi * phase);
    im += std::sin(2.0 * kPi * phase);
  }
  return {re / double(y.size()), im / double(y.size())};
}

// sum over all k of r(k)^e, for the tail bound of the (s, p) lattice error.
double powered_total_1d(const CoefficientProfile& profile, double e) {
  if (e == 1.0) return profile.total_1d();
  if (!(e > 0.5))
    throw ValidationError("lattice (s,p) error: weight series diverges (need s p' > 1)");
  constexpr std::int64_t K = 1 << 16;
  double sum = 0.0;
  for (std::int64_t k = K; k >= 1; --k) sum += 2.0 * std::pow(profile.r(k), e);
  // Every profile here decays at least like C / k^2 (exp: C = tau^2 / 4 pi^2),
  // so the remainder is bounded by the integral of env(K) (K/k)^{2e}.
  const double env = std::pow(profile.envelope(K), e);
  return 1.0 + sum + 2.0 * env * double(K) / (2.0 * e - 1.0);
}

}  // namespace

DiscrepancyReport periodic_error(const KernelSpec& spec, const PointSet& y, const NormParams& params,
                                 std::size_t terms) {
  check_dims(spec, y);
  params.validate();
  if (!spec.is_periodic()) throw ValidationError("periodic_error: kernel " + spec.id() + " is not periodic");
  const std::size_t N = y.size();
  if (terms == 0) terms = 10 * N;
  const double pc = params.conjugate();
  const bool sup = std::isinf(pc);
  // Profiles with finitely many positive coefficients (underflow) simply end early.
  const auto enumerated = enumerate_at_most(spec.profile(), terms + 2);
  const std::size_t head = std::min(enumerated.size(), terms + 1);

  double acc = 0.0, head_weight = 0.0;
  for (std::size_t t = 1; t < head; ++t) {
    const double rho = enumerated[t].coefficient;
    const double modulus = std::abs(exponential_mean(y, enumerated[t].index));
    if (sup) {
      acc = std::max(acc, std::pow(rho, 0.5 * params.s) * modulus);
    } else {
      const double w = std::pow(rho, 0.5 * params.s * pc);
      acc += w * std::pow(modulus, pc);
      head_weight += w;
    }
  }
  auto r = base_report(spec, y, Method::PeriodicClosedForm, 0.0);
  r.norm_params = params;
  double bound;
  if (sup) {
    const double next = enumerated.size() > head ? enumerated[head].coefficient : 0.0;
    bound = std::pow(next, 0.5 * params.s);
    r.value = acc;
  } else {
    const double e = 0.5 * params.s * pc;
    const double total = std::pow(powered_total_1d(spec.profile(), e), double(spec.dim()));
    bound = std::max(total - 1.0 - head_weight, 0.0);
    r.value = std::pow(acc, 1.0 / pc);
  }
  r.squared_value = r.value * r.value;
  r.head_value = acc;
  r.truncation_bound = bound;
  return r;
}

DiscrepancyReport spectral_error(const PointSet& y, const NormParams& params, std::size_t max_index) {
  params.validate();
  if (max_index == 0) throw ValidationError("spectral_error: max_index must be >= 1");
  const std::size_t N = y.size(), D = y.dim();
  const double pc = params.conjugate();
  const bool sup = std::isinf(pc);
  if (!sup && !(params.s * pc > 1.0))
    throw ValidationError("spectral_error: weight series diverges (need s p' > 1)");
  const double work = std::pow(double(max_index), double(D)) * double(N);
  if (work > 2e10) throw ValidationError("spectral_error: truncation box too large for this dimension");

  const std::size_t M = max_index;
  // Z[(d * M + (a-1)) * N + n] = sqrt2 sin(a pi y_{n,d}).
  std::vector<double> z(D * M * N);
  for (std::size_t d = 0; d < D; ++d)
    for (std::size_t a = 1; a <= M; ++a)
      for (std::size_t n = 0; n < N; ++n)
        z[(d * M + (a - 1)) * N + n] = std::numbers::sqrt2 * std::sin(double(a) * kPi * y(n, d));

  std::vector<std::size_t> alpha(D, 1);
  std::vector<double> prod(N);
  double acc = 0.0;
  for (;;) {
    double lambda = 1.0, integral = 1.0;
    std::fill(prod.begin(), prod.end(), 1.0);
    for (std::size_t d = 0; d < D; ++d) {
      const double w = double(alpha[d]) * kPi;
      lambda /= w * w;
      integral *= (alpha[d] % 2 == 1) ? 2.0 * std::numbers::sqrt2 / w : 0.0;
      const double* row = &z[(d * M + (alpha[d] - 1)) * N];
      for (std::size_t n = 0; n < N; ++n) prod[n] *= row[n];
    }
    double mean = 0.0;
    for (double v : prod) mean += v;
    mean /= double(N);
    const double c = integral - mean;
    if (sup)
      acc = std::max(acc, std::pow(lambda, 0.5 * params.s) * std::abs(c));
    else
      acc += std::pow(lambda, 0.5 * params.s * pc) * std::pow(std::abs(c), pc);
    std::size_t d = 0;
    while (d < D && ++alpha[d] > M) alpha[d++] = 1;
    if (d == D) break;
  }

  DiscrepancyReport r;
  r.method = Method::Spectral;
  r.kernel = "spline";
  r.n = N;
  r.d = D;
  r.norm_params = params;
  r.head_value = acc;
  const double amp = std::pow(2.0, 1.0 + 0.5 * double(D));
  if (sup) {
    r.tail_correction = 0.0;
    r.truncation_bound = amp * std::pow(double(M + 1) * kPi, -params.s) * std::pow(kPi, -params.s * double(D - 1));
    r.value = acc;
  } else {
    // Complement of the box for a tensor weight w(a): prod (P + T) - prod P.
    auto complement = [&](double head_1d, double tail_1d) {
      return std::pow(head_1d + tail_1d, double(D)) - std::pow(head_1d, double(D));
    };
    const double e = params.s * pc;  // weight (a pi)^{-e} per dimension
    double head_w = 0.0;
    for (std::size_t a = 1; a <= M; ++a) head_w += std::pow(double(a) * kPi, -e);
    const double tail_w = std::pow(kPi, -e) * power_tail_sum(e, long(M));
    r.truncation_bound = std::pow(amp, pc) * complement(head_w, tail_w);
    double corr = 0.0;
    if (pc == 2.0) {
      // Beyond the box the sample means behave like aliased noise with mean
      // square 1/N per coefficient, and the integrals are known exactly:
      // (int zeta_a)^2 = 8 / (a pi)^2 for odd a.
      const double q = e + 2.0;
      double head_i = 0.0;
      for (std::size_t a = 1; a <= M; a += 2) head_i += 8.0 * std::pow(double(a) * kPi, -q);
      const double odd_tail = power_tail_sum(q, long(M)) - std::pow(2.0, -q) * power_tail_sum(q, long(M / 2));
      const double tail_i = 8.0 * std::pow(kPi, -q) * odd_tail;
      corr = complement(head_w, tail_w) / double(N) + complement(head_i, tail_i);
    }
    r.tail_correction = corr;
    r.value = std::pow(acc + corr, 1.0 / pc);
  }
  r.squared_value = r.value * r.value;
  return r;
}

DiscrepancyReport asymptotic_error(const KernelSpec& spec, std::size_t n) {
  if (!spec.is_periodic()) throw ValidationError("asymptotic_error: kernel " + spec.id() + " is not periodic");
  if (n == 0) throw ValidationError("asymptotic_error: N must be >= 1");
  DiscrepancyReport r;
  r.method = Method::Asymptotic;
  r.kernel = spec.id();
  r.n = n;
  r.d = spec.dim();
  r.norm_params = NormParams{1.0, 2.0};
  r.value = asymptotic_discrepancy(spec.profile(), n);
  r.squared_value = r.value * r.value;
  return r;
}

double fourier_error_squared(const KernelSpec& spec, const PointSet& y, long max_index) {
  check_dims(spec, y);
  if (!spec.is_periodic()) throw ValidationError("fourier_error_squared: kernel is not periodic");
  if (max_index < 1) throw ValidationError("fourier_error_squared: max_index must be >= 1");
  const std::size_t D = y.dim();
  const double box = std::pow(double(2 * max_index + 1), double(D));
  if (box * double(y.size()) > 1e9) throw ValidationError("fourier_error_squared: box too large");
  std::vector<std::int64_t> alpha(D, -max_index);
  double sum = 0.0;
  for (;;) {
    const auto idx = LatticeIndex::dense(alpha);
    if (!idx.is_zero()) {
      const double rho = spec.profile().coefficient(idx);
      if (rho > 0.0) sum += rho * std::norm(exponential_mean(y, idx));
    }
    std::size_t d = 0;
    while (d < D && ++alpha[d] > max_index) alpha[d++] = -max_index;
    if (d == D) break;
  }
  return sum;
}

}  // namespace kdisc
