#include "kdisc/sampling.hpp"

#include <cmath>
#include <string>

#include "kdisc/errors.hpp"

namespace kdisc {

PointSet uniform_points(const RngSpec& rng, std::size_t n, std::size_t d) {
  if (n == 0 || d == 0) throw ValidationError("uniform_points: N and D must be >= 1");
  UniformStream stream(rng);
  std::vector<double> coords(n * d);
  for (double& c : coords) c = stream.next();
  return PointSet(n, d, std::move(coords));
}

McEstimate mc_integrate(const PointFunction& f, std::size_t d, std::size_t samples,
                        const RngSpec& rng) {
  if (samples < 2) throw ValidationError("mc_integrate: need at least 2 samples");
  if (d == 0) throw ValidationError("mc_integrate: D must be >= 1");
  UniformStream stream(rng);
  std::vector<double> x(d);
  // Welford running mean / variance.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& v : x) v = stream.next();
    const double fx = f(x);
    if (!std::isfinite(fx))
      throw NumericalError("mc_integrate: integrand not finite at sample " + std::to_string(s));
    const double delta = fx - mean;
    mean += delta / double(s + 1);
    m2 += delta * (fx - mean);
  }
  const double var = m2 / double(samples - 1);
  return {mean, std::sqrt(var / double(samples)), samples};
}

std::uint32_t cell_seed(std::uint32_t base, std::size_t n, std::size_t d) {
  return static_cast<std::uint32_t>(std::uint64_t{base} + 1000003ull * d + n);
}

}  // namespace kdisc
