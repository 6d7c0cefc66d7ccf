#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "kdisc/discrepancy.hpp"
#include "kdisc/errors.hpp"
#include "kdisc/kernels.hpp"
#include "kdisc/lattice.hpp"
#include "kdisc/optimize.hpp"
#include "kdisc/sampling.hpp"

using namespace kdisc;

namespace {

constexpr double kPi = std::numbers::pi;

// Brute-force exponential sum over a point set.
std::complex<double> exp_sum(const PointSet& y, std::span<const long> alpha) {
  std::complex<double> s = 0.0;
  for (std::size_t m = 0; m < y.size(); ++m) {
    double phase = 0.0;
    for (std::size_t d = 0; d < y.dim(); ++d) phase += y(m, d) * double(alpha[d]);
    s += std::polar(1.0, 2.0 * kPi * phase);
  }
  return s;
}

template <class F>
void check_fd_gradient(F value_grad, PointSet y, double rel_tol) {
  std::vector<double> g(y.coords().size());
  value_grad(y, std::span<double>(g));
  const double h = 1e-6;
  double scale = 0.0;
  for (double v : g) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double keep = y.coords()[i];
    y.coords()[i] = keep + h;
    const double up = value_grad(y, std::span<double>());
    y.coords()[i] = keep - h;
    const double down = value_grad(y, std::span<double>());
    y.coords()[i] = keep;
    CHECK(std::abs(g[i] - (up - down) / (2 * h)) <= rel_tol * std::max(scale, 1e-10));
  }
}

}  // namespace

TEST_CASE("grids") {
  const auto m1 = midpoint_1d(1);
  CHECK(m1.size() == 1);
  CHECK(m1(0, 0) == 0.5);
  const auto m4 = midpoint_1d(4);
  const double expected[] = {0.125, 0.375, 0.625, 0.875};
  for (std::size_t i = 0; i < 4; ++i) CHECK(m4(i, 0) == expected[i]);

  const std::size_t r4[] = {4};
  const auto g4 = canonical_grid(r4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(g4(i, 0) == 0.25 * double(i));

  const std::size_t r22[] = {2, 2};
  const auto g22 = canonical_grid(r22);
  REQUIRE(g22.size() == 4);
  const double corners[4][2] = {{0, 0}, {0, 0.5}, {0.5, 0}, {0.5, 0.5}};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(g22(i, 0) == corners[i][0]);
    CHECK(g22(i, 1) == corners[i][1]);
  }

  const std::size_t r32[] = {3, 2};
  const auto g32 = canonical_grid(r32);
  const long a11[] = {1, 1};
  CHECK(std::abs(exp_sum(g32, a11)) < 1e-12);
  for (long a = 0; a < 3; ++a)
    for (long b = 0; b < 2; ++b) {
      if (a == 0 && b == 0) continue;
      const long alpha[] = {a, b};
      CHECK(std::abs(exp_sum(g32, alpha)) < 1e-9 * 6.0);
    }
  CHECK_THROWS_AS(canonical_grid(std::span<const std::size_t>()), ValidationError);
  const std::size_t zero[] = {0};
  CHECK_THROWS_AS(canonical_grid(zero), ValidationError);
  CHECK_THROWS_AS(midpoint_1d(0), ValidationError);
}

TEST_CASE("spline descent recovers the midpoint grid") {
  const auto k = KernelSpec::spline(1);
  for (std::uint32_t seed : {0u, 1u, 2u}) {
    const auto res = descend_physical(k, uniform_points(RngSpec{seed}, 4, 1));
    std::vector<double> xs(res.points.coords().begin(), res.points.coords().end());
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(xs[i] - (2.0 * double(i) + 1.0) / 8.0) < 1e-6);
    CHECK(res.report.value == doctest::Approx(1.0 / (std::sqrt(12.0) * 4.0)).epsilon(1e-9));
  }
}

TEST_CASE("objective gradient") {
  SUBCASE("stationary at the midpoint grid") {
    const PhysicalObjective obj(KernelSpec::spline(1), 16);
    std::vector<double> g(16);
    obj.value_gradient(midpoint_1d(16), g);
    double norm = 0.0;
    for (double v : g) norm += v * v;
    CHECK(std::sqrt(norm) < 1e-10);
  }
  SUBCASE("finite differences") {
    for (const auto& k : {KernelSpec::spline(2), KernelSpec::periodic(Family::Exponential, 2),
                          KernelSpec::periodic(Family::Gaussian, 3), KernelSpec::transported(Family::Gaussian, 2),
                          KernelSpec::transported(Family::Multiquadric, 2)}) {
      CAPTURE(k.id());
      const auto y = uniform_points(RngSpec{5}, 7, k.dim());
      const PhysicalObjective obj(k, 7, 512, 3);
      check_fd_gradient(
          [&](const PointSet& p, std::span<double> g) {
            if (g.empty()) return obj.value(p);
            return obj.value_gradient(p, g);
          },
          y, 1e-5);
    }
  }
  SUBCASE("periodic objective equals the periodic error") {
    const auto k = KernelSpec::periodic(Family::Multiquadric, 3);
    const auto y = uniform_points(RngSpec{6}, 20, 3);
    CHECK(std::abs(PhysicalObjective(k, 20).value(y) - periodic_error(k, y).squared_value) < 1e-12);
    CHECK_FALSE(PhysicalObjective(k, 20).uses_monte_carlo());
    CHECK(PhysicalObjective(KernelSpec::transported(Family::Exponential, 2), 4).uses_monte_carlo());
  }
}

TEST_CASE("descent is monotone and improves on random points") {
  const auto k = KernelSpec::periodic(Family::Exponential, 2);
  const auto y0 = uniform_points(RngSpec{cell_seed(0, 64, 2)}, 64, 2);
  const double start = periodic_error(k, y0).value;
  CHECK(start == doctest::Approx(0.142).epsilon(0.25));
  const auto res = descend_physical(k, y0);
  REQUIRE(res.trace.size() >= 2);
  for (std::size_t i = 1; i < res.trace.size(); ++i) CHECK(res.trace[i] <= res.trace[i - 1]);
  CHECK(res.report.value < 0.142);
  CHECK(res.report.value < start);
  CHECK(std::abs(res.report.value - periodic_error(k, res.points).value) < 1e-12);
  for (double v : res.points.coords()) {
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
  CHECK_FALSE(res.stop_reason.empty());
}

TEST_CASE("optimizer configuration") {
  OptimizerConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_iterations = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.objective_tolerance = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.max_iterations = 3;
  const auto res = descend_physical(KernelSpec::periodic(Family::Gaussian, 2), uniform_points(RngSpec{1}, 8, 2), c);
  CHECK(res.iterations <= 3);
}

TEST_CASE("annihilation system") {
  SUBCASE("canonical grid solves the 1D box") {
    Cond1Problem p{1, {}};
    for (long a = 1; a <= 3; ++a) {
      const std::int64_t v[] = {a};
      p.targets.push_back(LatticeTerm{LatticeIndex::dense(v), 1.0});
    }
    const std::size_t r[] = {4};
    CHECK(cond1_functional(p, canonical_grid(r)) < 1e-24);
  }
  SUBCASE("single point is infeasible") {
    Cond1Problem p{1, {}};
    const std::int64_t v[] = {1};
    p.targets.push_back(LatticeTerm{LatticeIndex::dense(v), 1.0 / 3.0});
    const auto res = solve_cond1(p, midpoint_1d(1));
    CHECK(res.infeasible);
    CHECK_FALSE(res.success);
    CHECK(res.residual == 1.0);
  }
  SUBCASE("functional gradient") {
    const auto p = Cond1Problem::from_profile(KernelSpec::periodic(Family::Exponential, 2).profile(), 9);
    check_fd_gradient([&](const PointSet& y, std::span<double> g) { return cond1_functional(p, y, g); },
                      uniform_points(RngSpec{2}, 9, 2), 1e-5);
  }
  SUBCASE("per-gauss 16 points") {
    const auto k = KernelSpec::periodic(Family::Gaussian, 2);
    const auto p = Cond1Problem::from_profile(k.profile(), 16);
    CHECK(p.targets.size() == 16);
    OptimizerConfig c;
    c.max_iterations = 5000;
    const auto res = solve_cond1(p, uniform_points(RngSpec{0}, 16, 2), c);
    CHECK(res.success);
    CHECK(res.residual < 1e-8);
    CHECK(res.iterations <= 5000);
    CHECK(periodic_error(k, res.points).squared_value <= tail_mass(k.profile(), 16) + 1e-10);
  }
  SUBCASE("validation") {
    Cond1Problem p{2, {}};
    const std::int64_t z[] = {0, 0};
    p.targets.push_back(LatticeTerm{LatticeIndex::dense(z), 1.0});
    CHECK_THROWS_AS(p.validate(), ValidationError);
  }
}
