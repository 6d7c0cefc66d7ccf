// AVX2/FMA variant of the periodic pair sums. Compiled with -mavx2 -mfma and
// only reached through the runtime dispatcher.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pair_sum_impl.hpp"

namespace kdisc::simd::detail {

namespace {

inline __m256d set1(double v) { return _mm256_set1_pd(v); }

// e^x, |x| <= 700: x = n ln2 + r with |r| <= ln2/2, Taylor degree 13 on r.
inline __m256d exp_pd(__m256d x) {
  x = _mm256_min_pd(_mm256_max_pd(x, set1(-700.0)), set1(700.0));
  const __m256d n =
      _mm256_round_pd(_mm256_mul_pd(x, set1(1.4426950408889634)), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, set1(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(n, set1(1.90821492927058770002e-10), r);
  __m256d p = set1(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, set1(0.5));
  p = _mm256_fmadd_pd(p, r, set1(1.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0));
  const __m256i bits = _mm256_slli_epi64(
      _mm256_add_epi64(_mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n)), _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

// sin(2 pi t) and cos(2 pi t): reduce to a = 2 pi r, |r| <= 1/8, then rotate by
// the quadrant.
inline void sincos_2pi(__m256d t, __m256d& s_out, __m256d& c_out) {
  const int rnd = _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC;
  const __m256d u = _mm256_sub_pd(t, _mm256_round_pd(t, rnd));
  const __m256d qf = _mm256_round_pd(_mm256_mul_pd(u, set1(4.0)), rnd);
  const __m256d r = _mm256_fnmadd_pd(qf, set1(0.25), u);
  const __m256d a = _mm256_mul_pd(r, set1(2.0 * std::numbers::pi));
  const __m256d a2 = _mm256_mul_pd(a, a);

  __m256d sp = set1(-1.0 / 1307674368000.0);             // -1/15!
  sp = _mm256_fmadd_pd(sp, a2, set1(1.0 / 6227020800.0));  // 1/13!
  sp = _mm256_fmadd_pd(sp, a2, set1(-1.0 / 39916800.0));
  sp = _mm256_fmadd_pd(sp, a2, set1(1.0 / 362880.0));
  sp = _mm256_fmadd_pd(sp, a2, set1(-1.0 / 5040.0));
  sp = _mm256_fmadd_pd(sp, a2, set1(1.0 / 120.0));
  sp = _mm256_fmadd_pd(sp, a2, set1(-1.0 / 6.0));
  const __m256d s = _mm256_fmadd_pd(_mm256_mul_pd(sp, a2), a, a);

  __m256d cp = set1(1.0 / 20922789888000.0);               // 1/16!
  cp = _mm256_fmadd_pd(cp, a2, set1(-1.0 / 87178291200.0));  // -1/14!
  cp = _mm256_fmadd_pd(cp, a2, set1(1.0 / 479001600.0));
  cp = _mm256_fmadd_pd(cp, a2, set1(-1.0 / 3628800.0));
  cp = _mm256_fmadd_pd(cp, a2, set1(1.0 / 40320.0));
  cp = _mm256_fmadd_pd(cp, a2, set1(-1.0 / 720.0));
  cp = _mm256_fmadd_pd(cp, a2, set1(1.0 / 24.0));
  cp = _mm256_fmadd_pd(cp, a2, set1(-0.5));
  const __m256d c = _mm256_fmadd_pd(cp, a2, set1(1.0));

  // Quadrant q = round(4u) mod 4: (sin, cos) of a + q pi/2.
  const __m256i q = _mm256_and_si256(_mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(qf)), _mm256_set1_epi64x(3));
  const __m256d swap = _mm256_castsi256_pd(
      _mm256_cmpeq_epi64(_mm256_and_si256(q, _mm256_set1_epi64x(1)), _mm256_set1_epi64x(1)));
  const __m256d neg_s = _mm256_castsi256_pd(_mm256_cmpgt_epi64(q, _mm256_set1_epi64x(1)));
  const __m256d neg_c = _mm256_castsi256_pd(_mm256_cmpeq_epi64(
      _mm256_and_si256(_mm256_add_epi64(q, _mm256_set1_epi64x(1)), _mm256_set1_epi64x(2)),
      _mm256_set1_epi64x(2)));
  const __m256d sign = set1(-0.0);
  s_out = _mm256_xor_pd(_mm256_blendv_pd(s, c, swap), _mm256_and_pd(neg_s, sign));
  c_out = _mm256_xor_pd(_mm256_blendv_pd(c, s, swap), _mm256_and_pd(neg_c, sign));
}

inline __m256d wrap(__m256d x) {
  __m256d t = _mm256_sub_pd(x, _mm256_floor_pd(x));
  const __m256d ge1 = _mm256_cmp_pd(t, set1(1.0), _CMP_GE_OQ);
  return _mm256_andnot_pd(ge1, t);
}

// chi and (optionally) chi' on four differences at once.
template <bool kGrad>
inline __m256d factor(const PeriodicFactor& chi, __m256d x, __m256d* dv) {
  const __m256d t = wrap(x);
  __m256d v;
  __m256d g = _mm256_setzero_pd();
  switch (chi.family) {
    case Family::Exponential: {
      const __m256d u = _mm256_mul_pd(set1(chi.tau), _mm256_sub_pd(t, set1(0.5)));
      const __m256d e = exp_pd(u);
      const __m256d ei = _mm256_div_pd(set1(1.0), e);
      const __m256d half_amp = set1(0.5 * chi.amp);
      v = _mm256_mul_pd(half_amp, _mm256_add_pd(e, ei));
      if constexpr (kGrad) g = _mm256_mul_pd(_mm256_mul_pd(half_amp, set1(chi.tau)), _mm256_sub_pd(e, ei));
      break;
    }
    case Family::Multiquadric: {
      __m256d s, c;
      sincos_2pi(t, s, c);
      const double q = chi.ratio;
      const __m256d den = _mm256_fnmadd_pd(set1(2.0 * q), c, set1(1.0 + q * q));
      const __m256d inv = _mm256_div_pd(set1(1.0), den);
      v = _mm256_mul_pd(set1(chi.amp), inv);
      if constexpr (kGrad)
        g = _mm256_mul_pd(_mm256_mul_pd(set1(-chi.amp * 4.0 * std::numbers::pi * q), s), _mm256_mul_pd(inv, inv));
      break;
    }
    case Family::Gaussian: {
      __m256d s1, c1;
      sincos_2pi(t, s1, c1);
      __m256d c = c1, s = s1, sum = _mm256_setzero_pd(), dsum = _mm256_setzero_pd();
      for (std::size_t k = 1; k <= chi.theta_coef.size(); ++k) {
        const __m256d w = set1(chi.theta_coef[k - 1]);
        sum = _mm256_fmadd_pd(w, c, sum);
        if constexpr (kGrad) dsum = _mm256_fmadd_pd(_mm256_mul_pd(set1(double(k)), w), s, dsum);
        const __m256d cn = _mm256_fmsub_pd(c, c1, _mm256_mul_pd(s, s1));
        s = _mm256_fmadd_pd(s, c1, _mm256_mul_pd(c, s1));
        c = cn;
      }
      v = _mm256_fmadd_pd(set1(2.0), sum, set1(1.0));
      if constexpr (kGrad) g = _mm256_mul_pd(set1(-4.0 * std::numbers::pi), dsum);
      break;
    }
    case Family::Truncated: {
      const __m256d tau = set1(chi.tau);
      const __m256d zero = _mm256_setzero_pd();
      const __m256d a = _mm256_fnmadd_pd(tau, t, set1(1.0));
      const __m256d b = _mm256_fnmadd_pd(tau, _mm256_sub_pd(set1(1.0), t), set1(1.0));
      v = _mm256_mul_pd(tau, _mm256_add_pd(_mm256_max_pd(a, zero), _mm256_max_pd(b, zero)));
      if constexpr (kGrad) {
        const __m256d one = set1(1.0);
        const __m256d ind_a = _mm256_and_pd(_mm256_cmp_pd(a, zero, _CMP_GT_OQ), one);
        const __m256d ind_b = _mm256_and_pd(_mm256_cmp_pd(b, zero, _CMP_GT_OQ), one);
        g = _mm256_mul_pd(set1(chi.tau * chi.tau), _mm256_sub_pd(ind_b, ind_a));
      }
      break;
    }
    default:
      v = _mm256_setzero_pd();
  }
  if constexpr (kGrad) {
    // Zero slope at the kink t == 0, matching the scalar reference.
    const __m256d at0 = _mm256_cmp_pd(t, _mm256_setzero_pd(), _CMP_EQ_OQ);
    *dv = _mm256_andnot_pd(at0, g);
  }
  return v;
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double pair_sum_avx2(const PeriodicFactor& chi, const double* y, std::size_t n, std::size_t d,
                     double* grad) {
  const double diag = std::pow(chi.peak(), double(d));
  if (grad) std::fill(grad, grad + n * d, 0.0);
  // Wrapped so the vector element keeps the 32-byte alignment of __m256d.
  struct Lane {
    __m256d x;
  };
  std::vector<Lane> v(d), dv(d), prefix(d + 1);
  std::vector<double> sv(d), sdv(d), sprefix(d + 1);
  __m256d acc = _mm256_setzero_pd();
  double off_tail = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = i + 1;
    for (; m + 4 <= n; m += 4) {
      if (!grad) {
        __m256d p = set1(1.0);
        for (std::size_t k = 0; k < d; ++k) {
          const __m256d diff = _mm256_sub_pd(set1(y[k * n + i]), _mm256_loadu_pd(y + k * n + m));
          p = _mm256_mul_pd(p, factor<false>(chi, diff, nullptr));
        }
        acc = _mm256_add_pd(acc, p);
        continue;
      }
      prefix[0].x = set1(1.0);
      for (std::size_t k = 0; k < d; ++k) {
        const __m256d diff = _mm256_sub_pd(set1(y[k * n + i]), _mm256_loadu_pd(y + k * n + m));
        v[k].x = factor<true>(chi, diff, &dv[k].x);
        prefix[k + 1].x = _mm256_mul_pd(prefix[k].x, v[k].x);
      }
      acc = _mm256_add_pd(acc, prefix[d].x);
      __m256d suffix = set1(2.0);
      for (std::size_t k = d; k-- > 0;) {
        const __m256d g = _mm256_mul_pd(_mm256_mul_pd(prefix[k].x, suffix), dv[k].x);
        grad[k * n + i] += hsum(g);
        double* gm = grad + k * n + m;
        _mm256_storeu_pd(gm, _mm256_sub_pd(_mm256_loadu_pd(gm), g));
        suffix = _mm256_mul_pd(suffix, v[k].x);
      }
    }
    // Remainder lanes through the scalar factor.
    for (; m < n; ++m) {
      sprefix[0] = 1.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = y[k * n + i] - y[k * n + m];
        sv[k] = grad ? chi.value_derivative(diff, sdv[k]) : chi.value(diff);
        sprefix[k + 1] = sprefix[k] * sv[k];
      }
      off_tail += sprefix[d];
      if (!grad) continue;
      double suffix = 2.0;
      for (std::size_t k = d; k-- > 0;) {
        const double g = sprefix[k] * suffix * sdv[k];
        grad[k * n + i] += g;
        grad[k * n + m] -= g;
        suffix *= sv[k];
      }
    }
  }
  return double(n) * diag + 2.0 * (hsum(acc) + off_tail);
}

}  // namespace kdisc::simd::detail
