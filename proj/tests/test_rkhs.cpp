#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "kdisc/errors.hpp"
#include "kdisc/kernels.hpp"
#include "kdisc/rkhs.hpp"
#include "kdisc/sampling.hpp"

using namespace kdisc;

namespace {

constexpr double kPi = std::numbers::pi;

PointSet line(std::vector<double> xs) {
  const std::size_t n = xs.size();
  return PointSet(n, 1, std::move(xs));
}

double native_norm(const GramMatrix& g, const std::vector<double>& a) {
  const Eigen::Map<const Eigen::VectorXd> v(a.data(), Eigen::Index(a.size()));
  return std::sqrt(v.dot(g.entries() * v));
}

}  // namespace

TEST_CASE("spline gram matrix") {
  const auto g = gram(KernelSpec::spline(1), line({0.25, 0.75}));
  CHECK(g(0, 0) == doctest::Approx(0.1875).epsilon(1e-15));
  CHECK(g(1, 1) == doctest::Approx(0.1875).epsilon(1e-15));
  CHECK(g(0, 1) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(g(1, 0) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(g.max_eigenvalue() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(g.min_eigenvalue() == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(g.condition() == doctest::Approx(2.0).epsilon(1e-13));
  CHECK_FALSE(g.near_singular());
}

TEST_CASE("single-point gram is the diagonal") {
  const auto k = KernelSpec::periodic(Family::Exponential, 3);
  const auto y = uniform_points(RngSpec{7}, 1, 3);
  const auto g = gram(k, y);
  REQUIRE(g.size() == 1);
  CHECK(g(0, 0) == eval(k, y.point(0), y.point(0)));
}

TEST_CASE("per-gauss gram on random points is positive definite") {
  const auto g = gram(KernelSpec::periodic(Family::Gaussian, 4), uniform_points(RngSpec{0}, 64, 4));
  CHECK(g.min_eigenvalue() > 0.0);
}

TEST_CASE("duplicate points are flagged and refuse solves") {
  const auto k = KernelSpec::spline(1);
  const auto y = line({0.3, 0.3, 0.6});
  const auto g = gram(k, y);
  CHECK(g.near_singular());
  CHECK_THROWS_AS(g.solve(Eigen::VectorXd::Ones(3)), SingularGramError);
  const std::vector<double> f{1.0, 1.0, 1.0};
  CHECK_THROWS_AS(project(k, y, f), SingularGramError);
}

TEST_CASE("projection examples") {
  SUBCASE("single spline node") {
    const std::vector<double> f{1.0};
    const auto a = project(KernelSpec::spline(1), line({0.5}), f);
    REQUIRE(a.size() == 1);
    CHECK(a[0] == doctest::Approx(4.0).epsilon(1e-14));
  }
  SUBCASE("rows of the gram matrix project to unit vectors") {
    const auto k = KernelSpec::periodic(Family::Multiquadric, 2);
    const auto y = uniform_points(RngSpec{3}, 12, 2);
    const auto g = gram(k, y);
    for (std::size_t row = 0; row < y.size(); ++row) {
      std::vector<double> f(y.size());
      for (std::size_t j = 0; j < y.size(); ++j) f[j] = g(row, j);
      const auto a = project(k, y, f);
      for (std::size_t j = 0; j < y.size(); ++j) CHECK(std::abs(a[j] - (j == row ? 1.0 : 0.0)) < 1e-8);
    }
  }
  SUBCASE("interpolation and idempotence") {
    const auto k = KernelSpec::periodic(Family::Exponential, 2);
    const auto y = uniform_points(RngSpec{11}, 16, 2);
    const std::vector<double> z{0.37, 0.81};
    std::vector<double> f(16);
    for (std::size_t n = 0; n < 16; ++n) f[n] = eval(k, y.point(n), z);
    const auto a = project(k, y, f);
    std::vector<double> back(16, 0.0);
    for (std::size_t n = 0; n < 16; ++n)
      for (std::size_t m = 0; m < 16; ++m) back[n] += a[m] * eval(k, y.point(n), y.point(m));
    for (std::size_t n = 0; n < 16; ++n) CHECK(std::abs(back[n] - f[n]) < 1e-8 * std::abs(f[n]));
    const auto again = project(k, y, back);
    for (std::size_t n = 0; n < 16; ++n) CHECK(std::abs(again[n] - a[n]) < 1e-8 * (1.0 + std::abs(a[n])));
  }
}

TEST_CASE("partition of unity") {
  SUBCASE("Kronecker property at the nodes") {
    const auto k = KernelSpec::periodic(Family::Gaussian, 2);
    const auto y = uniform_points(RngSpec{5}, 10, 2);
    for (std::size_t m = 0; m < y.size(); ++m) {
      const auto theta = partition_of_unity(k, y, y.point(m));
      for (std::size_t n = 0; n < y.size(); ++n) CHECK(std::abs(theta[n] - (n == m ? 1.0 : 0.0)) < 1e-8);
    }
  }
  SUBCASE("single node") {
    const auto k = KernelSpec::spline(1);
    const double x = 0.2;
    const auto theta = partition_of_unity(k, line({0.6}), std::span(&x, 1));
    REQUIRE(theta.size() == 1);
    CHECK(theta[0] == doctest::Approx((0.2 * 0.4) / (0.6 * 0.4)).epsilon(1e-14));
  }
  SUBCASE("agrees with the projected interpolant") {
    const auto k = KernelSpec::spline(1);
    const auto y = line({1.0 / 3.0, 2.0 / 3.0});
    const std::vector<double> f{0.7, -1.3};
    const double x = 0.5;
    const auto theta = partition_of_unity(k, y, std::span(&x, 1));
    const auto a = project(k, y, f);
    double via_theta = 0.0, via_a = 0.0;
    for (std::size_t n = 0; n < 2; ++n) {
      via_theta += f[n] * theta[n];
      via_a += a[n] * eval(k, std::span(&x, 1), y.point(n));
    }
    CHECK(std::abs(via_theta - via_a) < 1e-12);
    // By symmetry of {1/3, 2/3} about 1/2 both weights agree: K(1/2, 1/3) / (K(1/3,1/3) + K(1/3,2/3)).
    const double expected = (1.0 / 6.0) / (2.0 / 9.0 + 1.0 / 9.0);
    CHECK(theta[0] == doctest::Approx(expected).epsilon(1e-13));
    CHECK(theta[1] == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("discrete norms") {
  const auto k = KernelSpec::periodic(Family::Exponential, 2);
  const auto y = uniform_points(RngSpec{2}, 20, 2);
  const auto g = gram(k, y);
  const auto coeff = uniform_points(RngSpec{9}, 20, 1);
  std::vector<double> a(coeff.coords().begin(), coeff.coords().end());
  for (auto& v : a) v -= 0.5;

  CHECK(discrete_norm(g, a, {0.5, 2.0}) == doctest::Approx(native_norm(g, a)).epsilon(1e-10));
  CHECK(discrete_norm(k, y, a, {0.5, 2.0}) == doctest::Approx(native_norm(g, a)).epsilon(1e-10));
  CHECK(discrete_norm(g, std::vector<double>(20, 0.0), {0.5, 2.0}) == 0.0);
  CHECK(discrete_norm(g, std::vector<double>(20, 0.0), {1.0, 3.0}) == 0.0);

  // s = 0, p = 2: the Euclidean norm of K a.
  const Eigen::Map<const Eigen::VectorXd> v(a.data(), 20);
  CHECK(discrete_norm(g, a, {0.0, 2.0}) == doctest::Approx((g.entries() * v).norm()).epsilon(1e-10));

  const std::vector<double> one{1.0};
  CHECK(discrete_norm(KernelSpec::spline(1), line({0.4}), one, {1.0, 2.0}) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(NormParams({-0.1, 2.0}).validate(), ValidationError);
  CHECK_THROWS_AS(NormParams({0.5, 0.5}).validate(), ValidationError);
  CHECK(NormParams({0.5, 2.0}).conjugate() == 2.0);
  CHECK(std::isinf(NormParams({0.5, 1.0}).conjugate()));
}

TEST_CASE("spline eigenpairs") {
  const long a1[] = {1};
  CHECK(spline_eigen(a1).eigenvalue == doctest::Approx(1.0 / (kPi * kPi)).epsilon(1e-15));
  CHECK(spline_eigen(a1).eigenvalue == doctest::Approx(0.10132118).epsilon(1e-8));
  const long a12[] = {1, 2};
  CHECK(spline_eigen(a12).eigenvalue == doctest::Approx(1.0 / (4.0 * std::pow(kPi, 4))).epsilon(1e-15));
  const long a3[] = {3};
  const double half = 0.5;
  CHECK(spline_eigen(a3)(std::span(&half, 1)) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-15));
  CHECK(spline_eigen(a3).integral() == doctest::Approx(2.0 * std::sqrt(2.0) / (3.0 * kPi)).epsilon(1e-15));
  const long a2[] = {2};
  CHECK(std::abs(spline_eigen(a2).integral()) < 1e-16);

  // Mercer sum reproduces the kernel.
  const double x = 0.3, y = 0.65;
  double mercer = 0.0;
  for (long i = 200000; i >= 1; --i) {
    const long ai[] = {i};
    const auto e = spline_eigen(ai);
    mercer += e.eigenvalue * e(std::span(&x, 1)) * e(std::span(&y, 1));
  }
  CHECK(mercer == doctest::Approx(eval(KernelSpec::spline(1), std::span(&x, 1), std::span(&y, 1))).epsilon(1e-6));

  const long bad[] = {0};
  CHECK_THROWS_AS(spline_eigen(bad), ValidationError);
  CHECK_THROWS_AS(spline_eigen(std::span<const long>()), ValidationError);
}
