#include "kdisc/rkhs.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "kdisc/errors.hpp"

namespace kdisc {

double NormParams::conjugate() const {
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

void NormParams::validate() const {
  if (!(std::isfinite(s) && s >= 0.0)) throw ValidationError("NormParams: s must be finite and >= 0");
  if (!(std::isfinite(p) && p >= 1.0)) throw ValidationError("NormParams: p must be finite and >= 1");
}

GramMatrix::GramMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols())
    throw ValidationError("GramMatrix: expected a nonempty square matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_);
  if (solver.info() != Eigen::Success) throw NumericalError("GramMatrix: eigendecomposition failed");
  // Eigen returns ascending order; store descending.
  eigenvalues_ = solver.eigenvalues().reverse();
  eigenvectors_ = solver.eigenvectors().rowwise().reverse();
}

double GramMatrix::condition() const {
  const double lo = min_eigenvalue();
  return lo > 0.0 ? max_eigenvalue() / lo : std::numeric_limits<double>::infinity();
}

bool GramMatrix::near_singular() const {
  return !(min_eigenvalue() >= kSingularCutoff * max_eigenvalue()) || !(max_eigenvalue() > 0.0);
}

Eigen::VectorXd GramMatrix::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != entries_.rows()) throw ValidationError("GramMatrix::solve: right-hand side has wrong size");
  if (near_singular())
    throw SingularGramError("Gram matrix is numerically singular (condition estimate " +
                                std::to_string(condition()) + ")",
                            condition());
  Eigen::VectorXd coords = eigenvectors_.transpose() * rhs;
  coords.array() /= eigenvalues_.array();
  return eigenvectors_ * coords;
}

GramMatrix gram(const KernelSpec& spec, const PointSet& y) {
  if (spec.dim() != y.dim())
    throw ValidationError("gram: kernel dimension " + std::to_string(spec.dim()) +
                          " does not match point dimension " + std::to_string(y.dim()));
  const std::size_t n = y.size();
  Eigen::MatrixXd k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(Eigen::Index(i), Eigen::Index(i)) = eval(spec, y.point(i), y.point(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = eval(spec, y.point(i), y.point(j));
      k(Eigen::Index(i), Eigen::Index(j)) = v;
      k(Eigen::Index(j), Eigen::Index(i)) = v;
    }
  }
  return GramMatrix(std::move(k));
}

namespace {

Eigen::VectorXd to_vector(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::vector<double> project(const KernelSpec& spec, const PointSet& y, std::span<const double> f_values) {
  if (f_values.size() != y.size()) throw ValidationError("project: expected one value per point");
  return to_std(gram(spec, y).solve(to_vector(f_values)));
}

std::vector<double> partition_of_unity(const KernelSpec& spec, const PointSet& y, std::span<const double> x) {
  if (x.size() != y.dim()) throw ValidationError("partition_of_unity: point dimension mismatch");
  const GramMatrix g = gram(spec, y);
  Eigen::VectorXd kx(Eigen::Index(y.size()));
  for (std::size_t n = 0; n < y.size(); ++n) kx(Eigen::Index(n)) = eval(spec, y.point(n), x);
  return to_std(g.solve(kx));
}

double discrete_norm(const GramMatrix& g, std::span<const double> a, const NormParams& params) {
  params.validate();
  if (a.size() != g.size()) throw ValidationError("discrete_norm: coefficient count does not match Gram size");
  const Eigen::VectorXd av = to_vector(a);
  const Eigen::VectorXd proj = g.eigenvectors().transpose() * av;  // a^T zeta_n
  double sum = 0.0;
  for (Eigen::Index n = 0; n < proj.size(); ++n) {
    const double lambda = g.eigenvalues()(n);
    if (proj(n) == 0.0) continue;
    if (lambda <= 0.0) {
      if (params.s > 0.0)
        throw NumericalError("discrete_norm: nonpositive Gram eigenvalue with s > 0");
      continue;
    }
    const double inner = std::abs(lambda * proj(n));
    // lambda^{-s p} inner^p, in logs to stay finite for tiny eigenvalues.
    sum += std::exp(params.p * (std::log(inner) - params.s * std::log(lambda)));
  }
  return std::pow(sum, 1.0 / params.p);
}

double discrete_norm(const KernelSpec& spec, const PointSet& y, std::span<const double> a,
                     const NormParams& params) {
  return discrete_norm(gram(spec, y), a, params);
}

double SplineEigenpair::operator()(std::span<const double> x) const {
  if (x.size() != alpha.size()) throw ValidationError("spline eigenfunction: dimension mismatch");
  double v = 1.0;
  for (std::size_t d = 0; d < alpha.size(); ++d)
    v *= std::numbers::sqrt2 * std::sin(double(alpha[d]) * std::numbers::pi * x[d]);
  return v;
}

double SplineEigenpair::integral() const {
  double v = 1.0;
  for (long a : alpha) {
    if (a % 2 == 0) return 0.0;
    v *= 2.0 * std::numbers::sqrt2 / (double(a) * std::numbers::pi);
  }
  return v;
}

SplineEigenpair spline_eigen(std::span<const long> alpha) {
  if (alpha.empty()) throw ValidationError("spline_eigen: index must have at least one entry");
  double lambda = 1.0;
  for (long a : alpha) {
    if (a < 1) throw ValidationError("spline_eigen: index entries must be >= 1");
    const double w = double(a) * std::numbers::pi;
    lambda /= w * w;
  }
  return SplineEigenpair{std::vector<long>(alpha.begin(), alpha.end()), lambda};
}

}  // namespace kdisc
