#pragma once

namespace kdisc {

/// Inverse error function on (-1, 1). Odd; erf(erfinv(u)) == u to ~1e-15 relative.
/// Throws ValidationError for |u| >= 1 or non-finite input.
double erfinv(double u);

/// Number of terms k = 1..K kept in the theta series sum q^{k^2} cos(2 pi k t):
/// the smallest K with q^{(K+1)^2} < 1e-17.
int theta3_terms(double q);

/// 1 + 2 sum_{k>=1} q^{k^2} cos(2 pi k t), the third Jacobi theta function in
/// nome q at argument pi t.
double theta3(double t, double q);

/// d/dt of theta3(t, q).
double theta3_derivative(double t, double q);

/// sum_{a > m} a^{-p} for p > 1 (direct below 32, Euler-Maclaurin beyond).
double power_tail_sum(double p, long m);

}  // namespace kdisc
