#include "kdisc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "kdisc/errors.hpp"
#include "kdisc/sampling.hpp"
#include "kdisc/simd/pair_sum.hpp"
#include "prepared_kernel.hpp"

namespace kdisc {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kArmijo = 1e-4;

// Plain complex product; std::complex operator* carries inf/nan recovery
// that dominates these inner loops.
inline std::complex<double> mul(std::complex<double> a, std::complex<double> b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
}  // namespace

void OptimizerConfig::validate() const {
  if (max_iterations == 0) throw ValidationError("optimizer: max_iterations must be >= 1");
  if (step_size < 0.0 || !std::isfinite(step_size)) throw ValidationError("optimizer: step_size must be >= 0");
  if (gradient_tolerance < 0.0 || !std::isfinite(gradient_tolerance))
    throw ValidationError("optimizer: gradient_tolerance must be >= 0");
  if (!(objective_tolerance > 0.0)) throw ValidationError("optimizer: objective_tolerance must be > 0");
  if (mc_samples < 2) throw ValidationError("optimizer: mc_samples must be >= 2");
  if (stall_window == 0) throw ValidationError("optimizer: stall_window must be >= 1");
}

// ---------------------------------------------------------------------------
// Objective

struct PhysicalObjective::Impl {
  enum class Mode { Periodic, ClosedForm, MonteCarlo };

  Impl(const KernelSpec& s, std::size_t n_points, std::size_t samples, std::uint32_t seed)
      : spec(s), prepared(s), n(n_points) {
    if (spec.is_periodic()) {
      mode = Mode::Periodic;
    } else if (kernel_double_mean(spec)) {
      mode = Mode::ClosedForm;
      double_mean = *kernel_double_mean(spec);
    } else {
      mode = Mode::MonteCarlo;
      const std::size_t D = spec.dim();
      const PointSet xs = uniform_points(RngSpec{seed}, 2 * samples, D);
      const auto all = prepared.prepare_all(xs.coords());
      frozen.assign(all.begin(), all.begin() + std::ptrdiff_t(samples * D));
      S = samples;
      double acc = 0.0;
      for (std::size_t s = 0; s < samples; ++s)
        acc += prepared(std::span<const double>(all).subspan(s * D, D),
                        std::span<const double>(all).subspan((samples + s) * D, D));
      double_mean = acc / double(samples);
    }
  }

  double evaluate(const PointSet& y, std::span<double> grad) const {
    if (y.size() != n || y.dim() != spec.dim()) throw ValidationError("objective: point set has the wrong shape");
    const std::size_t N = n, D = spec.dim();
    const double nn = double(N) * double(N);
    const bool want_grad = !grad.empty();
    if (want_grad && grad.size() != N * D) throw ValidationError("objective: gradient buffer has wrong size");

    if (mode == Mode::Periodic) {
      const auto dm = y.dim_major();
      if (!want_grad) return simd::periodic_pair_sum(spec.factor(), dm, N, D) / nn - 1.0;
      std::vector<double> g(N * D);
      const double s = simd::periodic_pair_sum_gradient(spec.factor(), dm, N, D, g);
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < D; ++k) grad[i * D + k] = g[k * N + i] / nn;
      return s / nn - 1.0;
    }

    const auto py = prepared.prepare_all(y.coords());
    std::span<const double> P(py);
    std::vector<double> tmp(D);
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

    // (1/N^2) sum_{n,m} K(y^n, y^m) and its gradient (both arguments).
    double pairs = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const auto a = P.subspan(i * D, D);
      for (std::size_t j = (want_grad ? 0 : i); j < N; ++j) {
        const auto b = P.subspan(j * D, D);
        if (!want_grad) {
          pairs += (j == i ? 1.0 : 2.0) * prepared(a, b);
          continue;
        }
        pairs += prepared.gradient_first(a, b, y.point(i), tmp);
        // y_i appears in K(y_i, y_j) and K(y_j, y_i): 2 d1 K(y_i, y_j) by symmetry.
        for (std::size_t k = 0; k < D; ++k) grad[i * D + k] += 2.0 * tmp[k] / nn;
      }
    }
    double value = pairs / nn;

    if (mode == Mode::ClosedForm) {
      double single = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        single += *kernel_mean(spec, y.point(i));
        if (want_grad) {
          kernel_mean_gradient(spec, y.point(i), tmp);
          for (std::size_t k = 0; k < D; ++k) grad[i * D + k] -= 2.0 * tmp[k] / double(N);
        }
      }
      return double_mean + value - 2.0 * single / double(N);
    }

    // Frozen Monte-Carlo samples.
    std::span<const double> X(frozen);
    double cross = 0.0;
    const double w = 2.0 / (double(N) * double(S));
    for (std::size_t i = 0; i < N; ++i) {
      const auto a = P.subspan(i * D, D);
      for (std::size_t s = 0; s < S; ++s) {
        const auto b = X.subspan(s * D, D);
        if (!want_grad) {
          cross += prepared(a, b);
          continue;
        }
        cross += prepared.gradient_first(a, b, y.point(i), tmp);
        for (std::size_t k = 0; k < D; ++k) grad[i * D + k] -= w * tmp[k];
      }
    }
    return double_mean + value - w * cross;
  }

  KernelSpec spec;
  internal::PreparedKernel prepared;
  std::size_t n;
  Mode mode = Mode::ClosedForm;
  double double_mean = 0.0;
  std::vector<double> frozen;
  std::size_t S = 0;
};

PhysicalObjective::PhysicalObjective(const KernelSpec& spec, std::size_t n, std::size_t mc_samples,
                                     std::uint32_t seed)
    : impl_(std::make_unique<Impl>(spec, n, mc_samples, seed)) {
  if (n == 0) throw ValidationError("objective: N must be >= 1");
}
PhysicalObjective::~PhysicalObjective() = default;
PhysicalObjective::PhysicalObjective(PhysicalObjective&&) noexcept = default;
PhysicalObjective& PhysicalObjective::operator=(PhysicalObjective&&) noexcept = default;

double PhysicalObjective::value(const PointSet& y) const { return impl_->evaluate(y, {}); }

double PhysicalObjective::value_gradient(const PointSet& y, std::span<double> grad) const {
  if (grad.empty()) throw ValidationError("objective: empty gradient buffer");
  return impl_->evaluate(y, grad);
}

bool PhysicalObjective::uses_monte_carlo() const { return impl_->mode == Impl::Mode::MonteCarlo; }

// ---------------------------------------------------------------------------
// Shared descent machinery

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Y - step * g, projected; returns <g, unprojected displacement>.
double take_step(const PointSet& y, std::span<const double> g, double step, bool wrap, PointSet& out) {
  double decrease = 0.0;
  auto src = y.coords();
  auto dst = out.coords();
  for (std::size_t j = 0; j < src.size(); ++j) {
    double v = src[j] - step * g[j];
    if (wrap) {
      v = wrap_unit(v);
      decrease += step * g[j] * g[j];
    } else {
      v = std::clamp(v, 0.0, 1.0);
      decrease += g[j] * (src[j] - v);
    }
    dst[j] = v;
  }
  return decrease;
}

struct Functional {
  // Value only when grad is empty.
  std::function<double(const PointSet&, std::span<double>)> eval;
};

struct DescentOutcome {
  PointSet best;
  double best_value;
  std::vector<double> trace;
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  std::string stop_reason;
};

DescentOutcome run_descent(const Functional& f, PointSet y, const OptimizerConfig& cfg, bool wrap,
                           double step0, double gtol, double target = -std::numeric_limits<double>::infinity()) {
  const std::size_t nd = y.coords().size();
  std::vector<double> g(nd), g_new(nd);
  double fy = f.eval(y, g);
  DescentOutcome out{y, fy, {fy}, 0, 0, "max_iterations"};
  PointSet cand = y;
  double step = step0;
  std::size_t window_start = 0;
  double window_value = fy;

  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    if (!std::isfinite(fy) || !std::isfinite(norm2(g)))
      throw NumericalError("optimizer: non-finite objective or gradient at iteration " + std::to_string(it - 1));
    if (fy <= target) {
      out.stop_reason = "target";
      break;
    }
    if (norm2(g) < gtol) {
      out.stop_reason = "gradient_tolerance";
      break;
    }
    double f_new;
    if (cfg.schedule == StepSchedule::Constant) {
      take_step(y, g, step, wrap, cand);
      f_new = f.eval(cand, g_new);
    } else {
      for (;;) {
        const double predicted = take_step(y, g, step, wrap, cand);
        f_new = f.eval(cand, {});
        if (f_new <= fy - kArmijo * predicted) break;
        step *= 0.5;
        if (step < 1e-20 * step0) break;
      }
      if (step < 1e-20 * step0) {
        out.stop_reason = "step_underflow";
        break;
      }
      f.eval(cand, g_new);
    }
    const double decrease = fy - f_new;
    y = cand;
    fy = f_new;
    g.swap(g_new);
    out.trace.push_back(fy);
    out.iterations = it;
    if (fy < out.best_value) {
      out.best_value = fy;
      out.best = y;
    }
    if (cfg.schedule == StepSchedule::Backtracking) step *= 2.0;

    if (cfg.schedule == StepSchedule::Backtracking &&
        decrease < cfg.objective_tolerance * std::max(1.0, std::abs(fy))) {
      out.stop_reason = "objective_tolerance";
      break;
    }
    // Stall: progress over the last window is tiny but still above tolerance.
    if (it - window_start >= cfg.stall_window) {
      const double rel = (window_value - fy) / std::max(std::abs(fy), 1e-300);
      if (rel < 1e6 * cfg.objective_tolerance) {
        if (out.restarts >= cfg.max_restarts) {
          out.stop_reason = "stalled";
          break;
        }
        ++out.restarts;
        y = out.best;
        fy = f.eval(y, g);
        step = step0 * std::pow(10.0, double(out.restarts));
      }
      window_start = it;
      window_value = fy;
    }
  }
  return out;
}

}  // namespace

DescentResult descend_physical(const KernelSpec& spec, PointSet y0, const OptimizerConfig& config) {
  config.validate();
  if (y0.dim() != spec.dim()) throw ValidationError("descend_physical: point dimension does not match kernel");
  y0.validate();
  const std::size_t N = y0.size();
  const double step0 = config.step_size > 0.0 ? config.step_size : 0.1 / double(N);
  const double gtol = config.gradient_tolerance > 0.0 ? config.gradient_tolerance : 1e-9 * double(N);
  const bool wrap = config.projection == Projection::Wrap ||
                    (config.projection == Projection::Auto && spec.is_periodic());

  PhysicalObjective objective(spec, N, config.mc_samples, config.seed);
  Functional f{[&](const PointSet& y, std::span<double> g) {
    return g.empty() ? objective.value(y) : objective.value_gradient(y, g);
  }};
  // A sampled objective is only resolved to its sampling noise; progress
  // below kMonteCarloObjectiveTolerance is not pursued.
  OptimizerConfig cfg = config;
  if (objective.uses_monte_carlo())
    cfg.objective_tolerance = std::max(cfg.objective_tolerance, OptimizerConfig::kMonteCarloObjectiveTolerance);
  auto out = run_descent(f, std::move(y0), cfg, wrap, step0, gtol);

  if (spec.kind() == KernelSpec::Kind::Spline) {
    // The spline objective is flat along common shifts of an equispaced
    // configuration; report the representative centred in the cube when it
    // is no worse.
    PointSet centred = out.best;
    for (std::size_t k = 0; k < centred.dim(); ++k) {
      double mean = 0.0;
      for (std::size_t i = 0; i < N; ++i) mean += centred(i, k);
      const double shift = 0.5 - mean / double(N);
      for (std::size_t i = 0; i < N; ++i) centred(i, k) = std::clamp(centred(i, k) + shift, 0.0, 1.0);
    }
    const double v = objective.value(centred);
    if (v <= out.best_value + 1e-14 * std::abs(out.best_value)) out.best = std::move(centred);
  }

  DescentResult r{out.best, {}, std::move(out.trace), out.iterations, out.restarts, out.stop_reason};
  if (spec.is_periodic()) {
    r.report = periodic_error(spec, r.points);
  } else if (kernel_double_mean(spec)) {
    r.report = physical_error(spec, r.points);
  } else {
    r.report = physical_error(spec, r.points, MonteCarloIntegrals{config.mc_samples, config.seed});
  }
  return r;
}

// ---------------------------------------------------------------------------
// COND1

Cond1Problem Cond1Problem::from_profile(const CoefficientProfile& profile, std::size_t n) {
  if (n == 0) throw ValidationError("Cond1Problem: N must be >= 1");
  auto terms = enumerate_decreasing(profile, n + 1);
  Cond1Problem p;
  p.dim = profile.dimension();
  for (auto& t : terms)
    if (!t.index.is_zero() && p.targets.size() < n) p.targets.push_back(std::move(t));
  return p;
}

void Cond1Problem::validate() const {
  if (dim == 0) throw ValidationError("Cond1Problem: dimension must be >= 1");
  if (targets.empty()) throw ValidationError("Cond1Problem: no targets");
  for (const auto& t : targets) {
    if (t.index.is_zero()) throw ValidationError("Cond1Problem: zero index among targets");
    if (t.index.dimension() != dim) throw ValidationError("Cond1Problem: target dimension mismatch");
  }
}

double cond1_functional(const Cond1Problem& problem, const PointSet& y, std::span<double> grad) {
  problem.validate();
  if (y.dim() != problem.dim) throw ValidationError("cond1_functional: point dimension mismatch");
  const std::size_t N = y.size(), D = y.dim(), T = problem.targets.size();
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != N * D) throw ValidationError("cond1_functional: gradient buffer has wrong size");

  // Per-dimension tables exp(2 i pi k y_{m,d}) for 0 <= k <= max |alpha_d|.
  std::vector<std::int64_t> kmax(D, 0);
  for (const auto& t : problem.targets)
    for (const auto& e : t.index.entries()) kmax[e.dim] = std::max(kmax[e.dim], std::abs(e.value));
  std::vector<std::size_t> offset(D + 1, 0);
  for (std::size_t d = 0; d < D; ++d) offset[d + 1] = offset[d] + std::size_t(kmax[d]) + 1;
  std::vector<std::complex<double>> table(N * offset[D]);
  for (std::size_t m = 0; m < N; ++m)
    for (std::size_t d = 0; d < D; ++d)
    {
      // Powers of exp(2 i pi y) by recurrence, re-anchored every 32 steps.
      auto* row = &table[m * offset[D] + offset[d]];
      const double phase = y(m, d);
      const std::complex<double> w = std::polar(1.0, 2.0 * kPi * phase);
      row[0] = 1.0;
      for (std::int64_t k = 1; k <= kmax[d]; ++k) {
        if (k % 32 == 0) {
          double p = double(k) * phase;
          p -= std::nearbyint(p);
          row[k] = std::polar(1.0, 2.0 * kPi * p);
        } else {
          row[k] = mul(row[k - 1], w);
        }
      }
    }

  std::vector<std::complex<double>> e(want_grad ? N * T : N);
  double total = 0.0;
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const auto entries = problem.targets[t].index.entries();
    std::complex<double> s = 0.0;
    for (std::size_t m = 0; m < N; ++m) {
      std::complex<double> z = 1.0;
      for (const auto& en : entries) {
        const auto w = table[m * offset[D] + offset[en.dim] + std::size_t(std::abs(en.value))];
        z = mul(z, en.value < 0 ? std::conj(w) : w);
      }
      (want_grad ? e[t * N + m] : e[m]) = z;
      s += z;
    }
    total += std::norm(s);
    if (!want_grad) continue;
    // d|S|^2 / dy_{m,d} = 4 pi alpha_d (Im S cos theta - Re S sin theta).
    for (std::size_t m = 0; m < N; ++m) {
      const auto z = e[t * N + m];
      const double common = 4.0 * kPi * (s.imag() * z.real() - s.real() * z.imag());
      for (const auto& en : entries) grad[m * D + en.dim] += common * double(en.value);
    }
  }
  return total;
}

Cond1Result solve_cond1(const Cond1Problem& problem, PointSet y0, const OptimizerConfig& config) {
  problem.validate();
  config.validate();
  if (y0.size() != problem.targets.size())
    throw ValidationError("solve_cond1: need exactly one starting point per target");
  if (y0.dim() != problem.dim) throw ValidationError("solve_cond1: point dimension mismatch");
  y0.validate();
  const std::size_t N = y0.size();
  const double nn = double(N) * double(N);
  if (N == 1) {
    // A single unit-modulus exponential never vanishes.
    return Cond1Result{std::move(y0), 1.0, false, true, 0};
  }
  Functional f{[&](const PointSet& y, std::span<double> g) {
    const double v = cond1_functional(problem, y, g);
    for (double& x : g) x /= nn;
    return v / nn;
  }};
  OptimizerConfig cfg = config;
  cfg.objective_tolerance = std::min(config.objective_tolerance, 1e-20);
  const double step0 = config.step_size > 0.0 ? config.step_size : 1e-3;
  auto out = run_descent(f, std::move(y0), cfg, /*wrap=*/true, step0, 0.0, /*target=*/1e-16);
  Cond1Result r{std::move(out.best), out.best_value, false, false, out.iterations};
  r.success = r.residual < 1e-8;
  return r;
}

PointSet canonical_grid(std::span<const std::size_t> r) {
  if (r.empty()) throw ValidationError("canonical_grid: need at least one axis");
  std::size_t n = 1;
  for (std::size_t v : r) {
    if (v == 0) throw ValidationError("canonical_grid: axis sizes must be >= 1");
    if (n > 10000000 / v) throw ValidationError("canonical_grid: more than 1e7 points");
    n *= v;
  }
  const std::size_t D = r.size();
  std::vector<double> coords(n * D);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rem = i;
    for (std::size_t d = D; d-- > 0;) {
      coords[i * D + d] = double(rem % r[d]) / double(r[d]);
      rem /= r[d];
    }
  }
  return PointSet(n, D, std::move(coords));
}

PointSet midpoint_1d(std::size_t n) {
  if (n == 0) throw ValidationError("midpoint_1d: N must be >= 1");
  std::vector<double> coords(n);
  for (std::size_t i = 0; i < n; ++i) coords[i] = double(2 * i + 1) / double(2 * n);
  return PointSet(n, 1, std::move(coords));
}

}  // namespace kdisc
