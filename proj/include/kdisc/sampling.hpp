#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "kdisc/pointset.hpp"

namespace kdisc {

/// Random stream identity: 32-bit Mersenne Twister (std::mt19937) with a seed.
struct RngSpec {
  std::uint32_t seed = 5489u;
};

/// Doubles in [0,1) with 53 random bits from two consecutive 32-bit draws
/// (the reference genrand_res53 recipe).
class UniformStream {
 public:
  explicit UniformStream(const RngSpec& spec) : engine_(spec.seed) {}
  double next() {
    const std::uint32_t a = engine_() >> 5, b = engine_() >> 6;
    return (double(a) * 67108864.0 + double(b)) * (1.0 / 9007199254740992.0);
  }

 private:
  std::mt19937 engine_;
};

/// N*D variates, point index outer and dimension inner.
PointSet uniform_points(const RngSpec& rng, std::size_t n, std::size_t d);

struct McEstimate {
  double estimate;
  double standard_error;
  std::size_t samples;
};

using PointFunction = std::function<double(std::span<const double>)>;

/// Sample mean of f over `samples` uniform points in [0,1]^D and its standard
/// error (sample standard deviation / sqrt(samples)). Throws NumericalError
/// naming the first sample where f is not finite.
McEstimate mc_integrate(const PointFunction& f, std::size_t d, std::size_t samples,
                        const RngSpec& rng);

/// Per-cell seed used by table generation: base + 1000003*D + N (mod 2^32).
std::uint32_t cell_seed(std::uint32_t base, std::size_t n, std::size_t d);

}  // namespace kdisc
