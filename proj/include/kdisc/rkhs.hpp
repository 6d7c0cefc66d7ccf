#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "kdisc/kernels.hpp"
#include "kdisc/pointset.hpp"

namespace kdisc {

/// Regularity s >= 0 and integrability p >= 1 of the discrete Banach norms.
struct NormParams {
  double s = 0.5;
  double p = 2.0;

  /// p' = p / (p - 1); infinity for p = 1.
  double conjugate() const;
  /// Throws ValidationError unless s >= 0 and p >= 1 (both finite).
  void validate() const;
};

/// Symmetric N x N matrix K(Y, Y) with its eigendecomposition (eigenvalues in
/// descending order, orthonormal eigenvectors as columns).
class GramMatrix {
 public:
  /// Relative eigenvalue floor below which the matrix counts as singular.
  static constexpr double kSingularCutoff = 1e-14;

  explicit GramMatrix(Eigen::MatrixXd entries);

  std::size_t size() const noexcept { return std::size_t(entries_.rows()); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_(Eigen::Index(i), Eigen::Index(j)); }

  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }
  double max_eigenvalue() const { return eigenvalues_(0); }
  double min_eigenvalue() const { return eigenvalues_(eigenvalues_.size() - 1); }
  /// lambda_max / lambda_min (infinite when lambda_min <= 0).
  double condition() const;
  /// Smallest eigenvalue below kSingularCutoff times the largest (near-duplicate
  /// points). Flagged, not fatal: only solves refuse such a matrix.
  bool near_singular() const;

  /// K^{-1} rhs through the eigendecomposition. Throws SingularGramError
  /// (carrying the condition estimate) when near_singular().
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::MatrixXd entries_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

/// K(Y, Y).
GramMatrix gram(const KernelSpec& spec, const PointSet& y);

/// Coefficients a = K(Y,Y)^{-1} f(Y) of the interpolant sum_m a_m K(., y^m).
std::vector<double> project(const KernelSpec& spec, const PointSet& y, std::span<const double> f_values);

/// theta_Y(x) = K(Y,Y)^{-1} K(Y, x); theta^n(y^m) = delta_{nm}.
std::vector<double> partition_of_unity(const KernelSpec& spec, const PointSet& y, std::span<const double> x);

/// (sum_n lambda_n^{-s p} |<phi, zeta_n>|^p)^{1/p} for phi = sum_m a_m K(., y^m),
/// where <phi, zeta_n> = a^T K zeta_n = lambda_n a^T zeta_n. At s = 1/2, p = 2 this
/// is the native norm sqrt(a^T K a).
double discrete_norm(const GramMatrix& gram, std::span<const double> a, const NormParams& params);
double discrete_norm(const KernelSpec& spec, const PointSet& y, std::span<const double> a,
                     const NormParams& params);

/// One eigenpair of the tensor spline kernel on [0,1]^D:
///   zeta_alpha(x) = prod_d sqrt(2) sin(alpha_d pi x_d),  lambda_alpha = prod_d (alpha_d pi)^{-2}.
struct SplineEigenpair {
  std::vector<long> alpha;
  double eigenvalue;

  std::size_t dim() const noexcept { return alpha.size(); }
  double operator()(std::span<const double> x) const;
  /// integral of zeta_alpha over [0,1]^D = prod_d sqrt(2) (1 - cos(alpha_d pi)) / (alpha_d pi).
  double integral() const;
};

/// Throws ValidationError unless alpha has D >= 1 entries, all >= 1.
SplineEigenpair spline_eigen(std::span<const long> alpha);

}  // namespace kdisc
