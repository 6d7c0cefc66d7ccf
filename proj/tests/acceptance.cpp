// Acceptance run: one PASS/FAIL line per criterion, each with the measured
// worst case, its pinned tolerance and the wall time. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "kdisc/cli/checks.hpp"
#include "kdisc/cli/commands.hpp"
#include "kdisc/discrepancy.hpp"
#include "kdisc/kernels.hpp"
#include "kdisc/lattice.hpp"
#include "kdisc/optimize.hpp"
#include "kdisc/sampling.hpp"

using namespace kdisc;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Family kFamilies[] = {Family::Exponential, Family::Multiquadric, Family::Gaussian, Family::Truncated};
constexpr std::size_t kNs[] = {16, 32, 64, 128, 256, 512};
constexpr std::size_t kDs[] = {1, 2, 4, 8, 16, 32, 64, 128};

const char* family_name(Family f) {
  switch (f) {
    case Family::Exponential: return "exp";
    case Family::Multiquadric: return "mq";
    case Family::Gaussian: return "gauss";
    case Family::Truncated: return "trunc";
  }
  return "?";
}

struct Outcome {
  bool passed = true;
  std::string summary;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Runs body(i) for i in [0, count) on every hardware thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), count));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// 1. Spline optimum on the midpoint grid.
Outcome criterion1() {
  const auto k = KernelSpec::spline(1);
  double physical_gap = 0.0, spectral_gap = 0.0;
  for (std::size_t n : kNs) {
    const auto y = midpoint_1d(n);
    const double target = 1.0 / (std::sqrt(12.0) * double(n));
    physical_gap = std::max(physical_gap, std::abs(physical_error(k, y).value - target));
    spectral_gap = std::max(spectral_gap, std::abs(spectral_error(y, NormParams{1.0, 2.0}, 10000).value - target));
  }
  return {physical_gap <= 1e-10 && spectral_gap <= 1e-6,
          fmt("max |E - 1/(sqrt(12) N)| = %.2e <= 1e-10; spectral (M=1e4) gap %.2e <= 1e-6", physical_gap,
              spectral_gap)};
}

// ---------------------------------------------------------------------------
// 2. Golden asymptotic tables, three decimals.
// clang-format off
constexpr double kAsymptoticExp[6][8] = {
    {0.069, 0.143, 0.202, 0.245, 0.288, 0.308, 0.318, 0.323},
    {0.034, 0.082, 0.129, 0.157, 0.179, 0.207, 0.220, 0.226},
    {0.017, 0.046, 0.078, 0.102, 0.116, 0.129, 0.147, 0.156},
    {0.009, 0.026, 0.048, 0.067, 0.077, 0.084, 0.092, 0.105},
    {0.004, 0.014, 0.029, 0.042, 0.052, 0.056, 0.060, 0.066},
    {0.002, 0.008, 0.018, 0.027, 0.034, 0.038, 0.040, 0.043}};
constexpr double kAsymptoticMq[6][8] = {
    {0.004, 0.081, 0.171, 0.207, 0.272, 0.301, 0.314, 0.321},
    {0.000, 0.027, 0.092, 0.134, 0.148, 0.194, 0.213, 0.223},
    {0.000, 0.005, 0.044, 0.085, 0.100, 0.105, 0.137, 0.151},
    {0.000, 0.001, 0.017, 0.043, 0.067, 0.073, 0.075, 0.097},
    {0.000, 0.000, 0.008, 0.025, 0.043, 0.050, 0.052, 0.053},
    {0.000, 0.000, 0.003, 0.014, 0.021, 0.034, 0.036, 0.037}};
constexpr double kAsymptoticGauss[6][8] = {
    {0.000, 0.018, 0.145, 0.198, 0.270, 0.300, 0.314, 0.321},
    {0.000, 0.000, 0.052, 0.126, 0.145, 0.193, 0.213, 0.223},
    {0.000, 0.000, 0.012, 0.077, 0.097, 0.104, 0.137, 0.151},
    {0.000, 0.000, 0.002, 0.032, 0.065, 0.072, 0.074, 0.097},
    {0.000, 0.000, 0.000, 0.020, 0.041, 0.050, 0.052, 0.053},
    {0.000, 0.000, 0.000, 0.008, 0.018, 0.033, 0.036, 0.037}};
// clang-format on

Outcome criterion2() {
  struct Table {
    Family f;
    const double (*values)[8];
  };
  const Table tables[] = {{Family::Exponential, kAsymptoticExp},
                          {Family::Multiquadric, kAsymptoticMq},
                          {Family::Gaussian, kAsymptoticGauss}};
  double worst = 0.0;
  std::string where = "-";
  for (const auto& t : tables)
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 8; ++j) {
        const double v = asymptotic_error(KernelSpec::periodic(t.f, kDs[j]), kNs[i]).value;
        const double gap = std::abs(v - t.values[i][j]);
        if (gap > worst) {
          worst = gap;
          where = fmt("%s N=%zu D=%zu", family_name(t.f), kNs[i], kDs[j]);
        }
      }
  return {worst <= 0.0015, fmt("144 cells, max |E - golden| = %.5f <= 0.0015 (at %s)", worst, where.c_str())};
}

// ---------------------------------------------------------------------------
// 3. Random baselines: mean of E^2 over 20 seeds vs (K(0,0) - 1) / N.
//
// For i.i.d. uniform points E^2 = (K(0,0) - 1)/N + (2/N^2) sum_{n<m} g(y^n - y^m)
// with g = chi - 1. The pair terms are uncorrelated (g has zero mean in either
// argument), so Var(E^2) = 2 (N - 1) / N^3 * (S2^D - 1), S2 = sum_k r(k)^2.
double squared_coefficient_sum_1d(const CoefficientProfile& p) {
  double s = 0.0;
  for (long k = 1 << 20; k >= 1; --k) s += p.r(k) * p.r(k);
  return 1.0 + 2.0 * s;  // the omitted tail is below 1e-18 for every family
}

Outcome criterion3() {
  constexpr std::size_t kSeeds = 20;
  struct Job {
    Family f;
    std::size_t n, d;
  };
  std::vector<Job> jobs;
  for (Family f : kFamilies)
    for (std::size_t n : kNs)
      for (std::size_t d : kDs) jobs.push_back({f, n, d});

  std::vector<double> z_exact(jobs.size()), z_sample(jobs.size()), mean_e(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto k = KernelSpec::periodic(job.f, job.d);
    const double zero = 0.0;
    const double peak = std::pow(k.factor().value(zero), double(job.d));
    const double expected = (peak - 1.0) / double(job.n);
    std::vector<double> e2(kSeeds);
    double sum = 0.0, sum_e = 0.0;
    for (std::uint32_t s = 0; s < kSeeds; ++s) {
      const auto r = periodic_error(k, uniform_points(RngSpec{cell_seed(s, job.n, job.d)}, job.n, job.d));
      e2[s] = r.squared_value;
      sum += r.squared_value;
      sum_e += r.value;
    }
    const double mean = sum / kSeeds;
    double ss = 0.0;
    for (double v : e2) ss += (v - mean) * (v - mean);
    const double sample_se = std::sqrt(ss / (kSeeds - 1) / kSeeds);
    const double n = double(job.n);
    const double var = 2.0 * (n - 1.0) / (n * n * n) *
                       (std::pow(squared_coefficient_sum_1d(k.profile()), double(job.d)) - 1.0);
    const double exact_se = std::sqrt(var / kSeeds);
    z_exact[j] = std::abs(mean - expected) / exact_se;
    z_sample[j] = std::abs(mean - expected) / sample_se;
    mean_e[j] = sum_e / kSeeds;
  });

  double worst = 0.0;
  std::size_t worst_j = 0, sample_outside = 0;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (z_exact[j] > worst) worst = z_exact[j], worst_j = j;
    if (z_sample[j] > 3.0) ++sample_outside;
  }
  double anchor = 0.0;
  for (std::size_t j = 0; j < jobs.size(); ++j)
    if (jobs[j].f == Family::Exponential && jobs[j].n == 512 && jobs[j].d == 128) anchor = mean_e[j];
  const bool ok = worst <= 3.0 && std::abs(anchor - 0.058) <= 0.0015;
  return {ok, fmt("192 cells x 20 seeds, max |mean E^2 - (K(0,0)-1)/N| = %.2f SE <= 3 (at %s N=%zu D=%zu; "
                  "%zu cells beyond 3 sample-SE); exp N=512 D=128 mean E = %.4f, |. - 0.058| <= 0.0015",
                  worst, family_name(jobs[worst_j].f), jobs[worst_j].n, jobs[worst_j].d, sample_outside, anchor)};
}

// ---------------------------------------------------------------------------
// 4. Optimized cells beat random cells.
Outcome criterion4() {
  struct Job {
    Family f;
    std::size_t n, d;
  };
  std::vector<Job> jobs;
  for (Family f : kFamilies)
    for (std::size_t n : {16, 32, 64, 128, 256})
      for (std::size_t d : {1, 2, 4, 8}) jobs.push_back({f, n, d});
  std::vector<double> opt(jobs.size()), rnd(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const auto k = KernelSpec::periodic(jobs[j].f, jobs[j].d);
    const auto seed = cell_seed(0, jobs[j].n, jobs[j].d);
    opt[j] = cli::compute_cell(k, cli::Mode::Optimized, jobs[j].n, seed).value;
    rnd[j] = cli::compute_cell(k, cli::Mode::Random, jobs[j].n, seed).value;
  });
  double worst_ratio = 0.0, worst_rel = 0.0;
  std::string where = "-";
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const double ratio = opt[j] / rnd[j];
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      where = fmt("%s N=%zu D=%zu", family_name(jobs[j].f), jobs[j].n, jobs[j].d);
    }
    if (jobs[j].f == Family::Exponential && jobs[j].d == 1)
      worst_rel = std::max(worst_rel, std::abs(opt[j] * double(jobs[j].n) - 1.0));
  }
  return {worst_ratio < 1.0 && worst_rel <= 0.02,
          fmt("80 cells, max E_opt / E_rand = %.3f < 1 (at %s); exp D=1 max |N E_opt - 1| = %.4f <= 0.02",
              worst_ratio, where.c_str(), worst_rel)};
}

// ---------------------------------------------------------------------------
// 5. Annihilation system.
Outcome criterion5() {
  double grid_worst = 0.0;
  const std::vector<std::vector<std::size_t>> grids{{4}, {2, 2}, {3, 2}, {4, 4}};
  for (const auto& r : grids) {
    const auto y = canonical_grid(r);
    const std::size_t d = r.size();
    // Every nonzero index of the box {0 <= alpha_d < R_d}.
    std::vector<std::int64_t> alpha(d, 0);
    for (;;) {
      std::size_t pos = 0;
      while (pos < d && ++alpha[pos] == std::int64_t(r[pos])) alpha[pos++] = 0;
      if (pos == d) break;
      double re = 0.0, im = 0.0;
      for (std::size_t m = 0; m < y.size(); ++m) {
        double phase = 0.0;
        for (std::size_t k = 0; k < d; ++k) phase += y(m, k) * double(alpha[k]);
        re += std::cos(2.0 * kPi * phase);
        im += std::sin(2.0 * kPi * phase);
      }
      grid_worst = std::max(grid_worst, std::hypot(re, im) / double(y.size()));
    }
  }

  double worst_residual = 0.0, worst_excess = -1.0;
  std::string where = "-";
  for (Family f : kFamilies)
    for (std::size_t n : {16, 64}) {
      const auto k = KernelSpec::periodic(f, 2);
      const auto problem = Cond1Problem::from_profile(k.profile(), n);
      const auto res = solve_cond1(problem, uniform_points(RngSpec{cell_seed(0, n, 2)}, n, 2));
      if (res.residual >= worst_residual) {
        worst_residual = res.residual;
        where = fmt("%s N=%zu", family_name(f), n);
      }
      const double excess = periodic_error(k, res.points).squared_value - tail_mass(k.profile(), n);
      worst_excess = std::max(worst_excess, excess);
    }
  return {grid_worst < 1e-9 && worst_residual < 1e-8 && worst_excess <= 1e-10,
          fmt("grid max |sum e|/N = %.1e < 1e-9; max residual %.1e < 1e-8 (at %s, D=2); "
              "max E^2 - tail = %.1e <= 1e-10",
              grid_worst, worst_residual, where.c_str(), worst_excess)};
}

// ---------------------------------------------------------------------------
// 6. Equivalent formulations.
Outcome criterion6() {
  // Physical (closed-form integrals) vs. Fourier-side form, all periodic kernels.
  double phys_gap = 0.0;
  for (Family f : kFamilies)
    for (std::size_t d : {1, 2, 8, 64})
      for (std::size_t n : {1, 16, 100}) {
        const auto k = KernelSpec::periodic(f, d);
        const auto y = uniform_points(RngSpec{std::uint32_t(7 * d + n)}, n, d);
        phys_gap = std::max(phys_gap, std::abs(physical_error(k, y).squared_value - periodic_error(k, y).squared_value));
      }
  // The lattice-sum form for the families with geometric decay, where a dense box converges.
  for (Family f : {Family::Multiquadric, Family::Gaussian}) {
    const auto k = KernelSpec::periodic(f, 2);
    const auto y = uniform_points(RngSpec{3}, 12, 2);
    phys_gap = std::max(phys_gap, std::abs(fourier_error_squared(k, y, 64) - periodic_error(k, y).squared_value));
  }

  // Closed-form periodic factor vs. its Fourier series 1 + 2 sum_k r(k) cos(2 pi k t).
  // Algebraic families (exp, trunc) need M = 2^27 terms for a tail below 5e-9.
  struct Job {
    Family f;
    std::size_t d;
    double t;
  };
  std::vector<Job> jobs;
  for (Family f : kFamilies)
    for (std::size_t d : {1, 8})
      for (double t : {0.0, 0.137, 0.5}) jobs.push_back({f, d, t});
  std::vector<double> gaps(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const auto k = KernelSpec::periodic(jobs[j].f, jobs[j].d);
    const auto& p = k.profile();
    const bool algebraic = jobs[j].f == Family::Exponential || jobs[j].f == Family::Truncated;
    const long m = algebraic ? (1L << 27) : 256;
    double s = 0.0;
    for (long i = m; i >= 1; --i) s += p.r(i) * std::cos(2.0 * kPi * double(i) * jobs[j].t);
    gaps[j] = std::abs(k.factor().value(jobs[j].t) - (1.0 + 2.0 * s));
  });
  const double poisson_gap = *std::max_element(gaps.begin(), gaps.end());

  // Spectral vs. physical for the spline kernel, on midpoints and random points.
  double spectral_gap = 0.0;
  const auto spline = KernelSpec::spline(1);
  for (std::size_t n : {16, 64, 512}) {
    for (const auto& y : {midpoint_1d(n), uniform_points(RngSpec{std::uint32_t(n)}, n, 1)})
      spectral_gap = std::max(spectral_gap, std::abs(spectral_error(y, NormParams{1.0, 2.0}, 10000).value -
                                                     physical_error(spline, y).value));
  }
  return {phys_gap <= 1e-12 && poisson_gap <= 1e-8 && spectral_gap <= 1e-6,
          fmt("physical vs Fourier %.1e <= 1e-12; closed form vs Fourier series %.1e <= 1e-8; "
              "spectral vs physical (spline) %.1e <= 1e-6",
              phys_gap, poisson_gap, spectral_gap)};
}

// ---------------------------------------------------------------------------
// 7. Property suites.
Outcome criterion7() {
  const auto results = cli::run_checks();
  std::size_t passed = 0;
  std::string failed;
  for (const auto& r : results) {
    if (r.passed)
      ++passed;
    else
      failed += " " + r.name;
  }
  return {passed == results.size(),
          fmt("%zu/%zu suites pass%s%s", passed, results.size(), failed.empty() ? "" : "; failing:", failed.c_str())};
}

// ---------------------------------------------------------------------------
// 8. Monte-Carlo pipeline for the transported Gaussian at N = 64, D = 2.
//
// Oracle: after the change of variables s = S(x) the Gaussian profile
// integrates in closed form, per dimension
//   int exp(-tau^2 (S(x) - s)^2) dx = (1 + tau^2)^{-1/2} exp(-tau^2 s^2 / (1 + tau^2)),
//   iint exp(-tau^2 (S(x) - S(y))^2) dx dy = (1 + 2 tau^2)^{-1/2}.
double transported_gauss_exact(const KernelSpec& k, const PointSet& y) {
  const TransportMap map(k.dim());
  const double t2 = k.tau() * k.tau();
  const double n = double(y.size());
  double single = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double prod = k.amplitude();
    for (std::size_t d = 0; d < k.dim(); ++d) {
      const double s = map.forward(y(i, d));
      prod *= std::exp(-t2 * s * s / (1.0 + t2)) / std::sqrt(1.0 + t2);
    }
    single += prod;
    for (std::size_t j = 0; j < y.size(); ++j) pairs += eval(k, y.point(i), y.point(j));
  }
  const double e2 = k.amplitude() * std::pow(1.0 + 2.0 * t2, -0.5 * double(k.dim())) + pairs / (n * n) -
                    2.0 * single / n;
  return std::sqrt(std::max(e2, 0.0));
}

Outcome criterion8() {
  const auto k = KernelSpec::transported(Family::Gaussian, 2);
  const std::size_t n = 64, reps = 200;
  const auto seed = cell_seed(0, n, 2);
  const auto y = uniform_points(RngSpec{seed}, n, 2);
  const double exact = transported_gauss_exact(k, y);

  std::vector<char> covered(reps);
  parallel_for(reps, [&](std::size_t r) {
    const auto rep = physical_error(k, y, MonteCarloIntegrals{std::size_t(1) << 16, std::uint32_t(1000 + r)});
    covered[r] = std::abs(rep.value - exact) <= 2.0 * *rep.standard_error;
  });
  const double coverage = double(std::count(covered.begin(), covered.end(), 1)) / double(reps);

  const auto opt = cli::optimize_points(k, n, seed);
  const double e_opt = transported_gauss_exact(k, opt.points);
  const double improvement = 1.0 - e_opt / exact;
  const double reported_opt = cli::evaluate_points(k, opt.points, seed).value;
  const double reported_rnd = cli::compute_cell(k, cli::Mode::Random, n, seed).value;
  const double reported_improvement = 1.0 - reported_opt / reported_rnd;
  return {coverage >= 0.90 && coverage <= 0.99 && improvement >= 0.20 && reported_improvement >= 0.20,
          fmt("+-2 SE coverage %.3f in [0.90, 0.99] over 200 reps of 2^16 samples; optimized improves E by "
              "%.1f%% (exact integrals) and %.1f%% (reported MC) >= 20%%",
              coverage, 100.0 * improvement, 100.0 * reported_improvement)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
    double budget_seconds;  // 0: no runtime requirement
  };
  const Criterion criteria[] = {
      {1, "spline closed-form optimum", criterion1, 1.0},
      {2, "asymptotic golden tables", criterion2, 30.0},
      {3, "random-baseline statistics", criterion3, 300.0},
      {4, "optimization improvement", criterion4, 900.0},
      {5, "annihilation solver", criterion5, 0.0},
      {6, "formulation equivalence", criterion6, 0.0},
      {7, "property suites", criterion7, 0.0},
      {8, "transported-kernel Monte Carlo", criterion8, 0.0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.2f s", secs);
    if (c.budget_seconds > 0.0) {
      timing += fmt(" < %.0f s", c.budget_seconds);
      if (secs >= c.budget_seconds) o.passed = false;
    }
    std::printf("%s criterion %d (%s): %s [%s]\n", o.passed ? "PASS" : "FAIL", c.id, c.name, o.summary.c_str(),
                timing.c_str());
    std::fflush(stdout);
    if (!o.passed) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
