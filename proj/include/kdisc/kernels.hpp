#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kdisc/family.hpp"
#include "kdisc/lattice.hpp"
#include "kdisc/periodic_factor.hpp"

namespace kdisc {

namespace detail {
struct KernelNode;
}

/// Immutable, cheaply copyable description of a kernel: one of the base
/// kernels (seed, periodic, transported, spline) or a combinator node.
///
///   seed         exp(-|x|_1), (1+|x|^2)^{-(D+1)/2}, exp(-|x|^2/2), (1-|x|)_+^D  on R^D
///   periodic     prod_d chi(x_d - y_d) on [0,1]^D, Fourier profile normalized to rho(0) = 1
///   transported  a radial kernel evaluated at S(x) - S(y), S_d(x) = erfinv(2 x_d - 1)
///   spline       prod_d min(x_d, y_d) (1 - max(x_d, y_d))
class KernelSpec {
 public:
  enum class Kind { Seed, Periodic, Transported, Spline, Tensor, Sum, Product, Normalized };

  static KernelSpec seed(Family family, std::size_t dim);
  /// Periodic kernel with the default tau for `dim` (see default_tau).
  static KernelSpec periodic(Family family, std::size_t dim);
  static KernelSpec periodic(Family family, std::size_t dim, double tau);
  /// Transported kernel with the default tau and beta for `dim`.
  static KernelSpec transported(Family family, std::size_t dim);
  static KernelSpec transported(Family family, std::size_t dim, double tau, double beta);
  static KernelSpec spline(std::size_t dim);

  /// Product of 1-D kernels, one per coordinate.
  static KernelSpec tensor(std::vector<KernelSpec> factors);
  /// a K1 + b K2 with a, b > 0.
  static KernelSpec sum(double a, KernelSpec first, double b, KernelSpec second);
  static KernelSpec product(KernelSpec first, KernelSpec second);
  /// K(x,y) / sqrt(K(x,x) K(y,y)).
  static KernelSpec normalized(KernelSpec inner);

  /// `<seed|per|tra>-<exp|mq|gauss|trunc>` or `spline`.
  static KernelSpec parse(std::string_view id, std::size_t dim);

  Kind kind() const noexcept;
  std::size_t dim() const noexcept;
  /// Round-trippable id for base kernels ("per-gauss"); a readable expression
  /// for combinators.
  std::string id() const;
  bool is_periodic() const noexcept { return kind() == Kind::Periodic; }

  /// Base kernels other than spline. Throws ValidationError otherwise.
  Family family() const;
  /// Periodic and transported kernels.
  double tau() const;
  /// Transported kernels.
  double beta() const;
  /// Transported kernels: the factor multiplying localized_profile (1/beta for
  /// exp, beta otherwise).
  double amplitude() const;
  /// Periodic kernels.
  const CoefficientProfile& profile() const;
  const PeriodicFactor& factor() const;
  /// Combinator operands (empty for base kernels).
  std::span<const KernelSpec> operands() const;

  const detail::KernelNode& node() const noexcept { return *node_; }

 private:
  explicit KernelSpec(std::shared_ptr<const detail::KernelNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::KernelNode> node_;
};

enum class Combinator { Tensor, Sum, Product, Normalize };

/// Generic combinator entry point. Sum takes two operands and two weights;
/// Product two operands; Normalize one; Tensor one or more 1-D operands.
KernelSpec combine(Combinator op, std::span<const KernelSpec> operands,
                   std::span<const double> weights = {});

enum class Localization { Seed, Periodic, Transported };

/// Default tau of the periodic and transported kernels:
///   periodic     exp sqrt(12/D), mq ln(2D+1)/pi, gauss ln(2D)/pi^2, trunc 1 + 1/D
///   transported  exp sqrt(pi)/D, mq / gauss / trunc sqrt(2/D)
double default_tau(Localization loc, Family family, std::size_t dim);

/// Default amplitude parameter of the transported kernels:
///   exp (e^{tau^2/4} erfc(tau/2))^D (the kernel carries 1/beta),
///   mq (tau / (sqrt(pi) e^{1/tau^2} erfc(1/tau)))^D, gauss (1+tau^2)^{D/2}, trunc 1.
double default_beta(Family family, std::size_t dim, double tau);

/// K(x, y). Throws ValidationError on dimension mismatch or non-finite input.
double eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// K(x, y) and its gradient in x, written into grad_x (size D). At kinks the
/// average of the one-sided derivatives is used.
double eval_gradient(const KernelSpec& spec, std::span<const double> x, std::span<const double> y,
                     std::span<double> grad_x);

/// K(x,x) + K(y,y) - 2 K(x,y), clamped at 0.
double pseudo_distance(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// rho(alpha) of a periodic kernel.
double fourier_coefficient(const KernelSpec& spec, const LatticeIndex& index);

/// Closed-form mean over [0,1]^D of K(., y), when the kernel has one
/// (periodic: 1; spline: prod y(1-y)/2; tensor and sum nodes of such kernels).
std::optional<double> kernel_mean(const KernelSpec& spec, std::span<const double> y);
/// Gradient in y of kernel_mean; false when no closed form exists.
bool kernel_mean_gradient(const KernelSpec& spec, std::span<const double> y, std::span<double> grad);
/// Closed-form double mean over [0,1]^D x [0,1]^D (periodic: 1; spline: 12^{-D}).
std::optional<double> kernel_double_mean(const KernelSpec& spec);

/// Componentwise S(x) = erfinv(2x - 1), the transport from the unit cube onto
/// R^D. Inputs are clamped to [1e-12, 1 - 1e-12].
class TransportMap {
 public:
  static constexpr double kClamp = 1e-12;
  explicit TransportMap(std::size_t dim);
  std::size_t dim() const noexcept { return dim_; }
  double forward(double x) const;
  /// dS/dx at the clamped point (0 outside the clamp window).
  double derivative(double x) const;
  double inverse(double s) const;
  std::vector<double> apply(std::span<const double> x) const;

 private:
  std::size_t dim_;
};

/// The translation-invariant profile a transported kernel pulls back, at
/// displacement u in R^D, without its beta amplitude:
///   exp exp(-tau |u|_1), mq (1 + tau^2 |u|^2)^{-(D+1)/2},
///   gauss exp(-tau^2 |u|^2), trunc (1 + tau |u|^2)^{-D}.
double localized_profile(Family family, double tau, std::span<const double> u);
/// The same profile and its gradient in u (written into grad, size D).
double localized_profile_gradient(Family family, double tau, std::span<const double> u,
                                  std::span<double> grad);

}  // namespace kdisc
