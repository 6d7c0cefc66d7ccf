#include <algorithm>
#include <cmath>
#include <vector>

#include "pair_sum_impl.hpp"

namespace kdisc::simd::detail {

double pair_sum_scalar(const PeriodicFactor& chi, const double* y, std::size_t n, std::size_t d,
                       double* grad) {
  const double diag = std::pow(chi.peak(), double(d));
  if (grad) std::fill(grad, grad + n * d, 0.0);
  std::vector<double> v(d), dv(d), prefix(d + 1);
  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = i + 1; m < n; ++m) {
      if (!grad) {
        double p = 1.0;
        for (std::size_t k = 0; k < d; ++k) p *= chi.value(y[k * n + i] - y[k * n + m]);
        off += p;
        continue;
      }
      prefix[0] = 1.0;
      for (std::size_t k = 0; k < d; ++k) {
        v[k] = chi.value_derivative(y[k * n + i] - y[k * n + m], dv[k]);
        prefix[k + 1] = prefix[k] * v[k];
      }
      off += prefix[d];
      // Each unordered pair appears twice in the full sum; chi' is odd, so the
      // pair's derivative in y_m is the negative of its derivative in y_i.
      double suffix = 1.0;
      for (std::size_t k = d; k-- > 0;) {
        const double g = 2.0 * prefix[k] * suffix * dv[k];
        grad[k * n + i] += g;
        grad[k * n + m] -= g;
        suffix *= v[k];
      }
    }
  }
  return double(n) * diag + 2.0 * off;
}

}  // namespace kdisc::simd::detail
