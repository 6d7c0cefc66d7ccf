#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "kdisc/errors.hpp"
#include "kdisc/kernels.hpp"
#include "kdisc/sampling.hpp"

using namespace kdisc;

namespace {

// Reference MT19937 from the defining algorithm constants, independent of <random>.
class ReferenceMt {
 public:
  explicit ReferenceMt(std::uint32_t seed) {
    mt_[0] = seed;
    for (int i = 1; i < 624; ++i) mt_[i] = 1812433253u * (mt_[i - 1] ^ (mt_[i - 1] >> 30)) + std::uint32_t(i);
  }
  std::uint32_t next() {
    if (index_ >= 624) twist();
    std::uint32_t y = mt_[index_++];
    y ^= y >> 11;
    y ^= (y << 7) & 0x9d2c5680u;
    y ^= (y << 15) & 0xefc60000u;
    y ^= y >> 18;
    return y;
  }
  double res53() {
    const std::uint32_t a = next() >> 5, b = next() >> 6;
    return (a * 67108864.0 + b) / 9007199254740992.0;
  }

 private:
  void twist() {
    for (int i = 0; i < 624; ++i) {
      const std::uint32_t y = (mt_[i] & 0x80000000u) | (mt_[(i + 1) % 624] & 0x7fffffffu);
      mt_[i] = mt_[(i + 397) % 624] ^ (y >> 1) ^ ((y & 1u) ? 0x9908b0dfu : 0u);
    }
    index_ = 0;
  }
  std::uint32_t mt_[624];
  int index_ = 624;
};

}  // namespace

TEST_CASE("uniform points follow the reference stream") {
  ReferenceMt ref(5489u);
  const auto first = uniform_points(RngSpec{}, 1, 1);
  CHECK(first(0, 0) == ref.res53());
  CHECK(first(0, 0) == 0.8147236863931789);

  ReferenceMt ref2(123u);
  const auto y = uniform_points(RngSpec{123u}, 2, 3);
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t d = 0; d < 3; ++d) CHECK(y(n, d) == ref2.res53());

  ReferenceMt ref3(77u);
  const auto big = uniform_points(RngSpec{77u}, 700, 2);  // crosses a twist boundary
  for (double v : big.coords()) REQUIRE(v == ref3.res53());
}

TEST_CASE("determinism and range") {
  CHECK(uniform_points(RngSpec{9}, 50, 4) == uniform_points(RngSpec{9}, 50, 4));
  CHECK_FALSE(uniform_points(RngSpec{9}, 50, 4) == uniform_points(RngSpec{10}, 50, 4));
  for (double v : uniform_points(RngSpec{1}, 1000, 3).coords()) {
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("Monte-Carlo integration") {
  const auto one = mc_integrate([](std::span<const double>) { return 1.0; }, 3, 1000, RngSpec{1});
  CHECK(one.estimate == 1.0);
  CHECK(one.standard_error == 0.0);
  CHECK(one.samples == 1000);

  const auto lin = mc_integrate([](std::span<const double> x) { return x[0]; }, 1, 1 << 16, RngSpec{2});
  CHECK(std::abs(lin.estimate - 0.5) < 3.0 * lin.standard_error);
  CHECK(lin.standard_error == doctest::Approx(std::sqrt(1.0 / 12.0 / 65536.0)).epsilon(0.02));

  const auto spline = KernelSpec::spline(1);
  const auto dbl = mc_integrate(
      [&](std::span<const double> x) { return eval(spline, x.subspan(0, 1), x.subspan(1, 1)); }, 2, 1 << 16,
      RngSpec{3});
  CHECK(std::abs(dbl.estimate - 1.0 / 12.0) < 3.0 * dbl.standard_error);

  CHECK_THROWS_AS(mc_integrate([](std::span<const double>) { return std::numeric_limits<double>::quiet_NaN(); },
                               1, 10, RngSpec{}),
                  NumericalError);
}

TEST_CASE("cell seeds") {
  CHECK(cell_seed(0, 16, 1) == 1000003u + 16u);
  CHECK(cell_seed(7, 512, 128) == 7u + 1000003u * 128u + 512u);
  CHECK(cell_seed(0xffffffffu, 1, 0) == 0u);
}
