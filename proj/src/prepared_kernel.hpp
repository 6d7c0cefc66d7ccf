#pragma once

// Kernel evaluation on pre-transformed coordinates. Transported kernels pay
// for erfinv once per point instead of once per pair, which is what makes the
// Monte-Carlo integrals and their gradients affordable.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "kdisc/kernels.hpp"

namespace kdisc::internal {

class PreparedKernel {
 public:
  explicit PreparedKernel(const KernelSpec& spec)
      : spec_(spec), transported_(spec.kind() == KernelSpec::Kind::Transported), map_(spec.dim()) {
    if (transported_) {
      family_ = spec.family();
      tau_ = spec.tau();
      amplitude_ = spec.amplitude();
    }
  }

  std::size_t dim() const { return spec_.dim(); }
  bool transported() const { return transported_; }

  /// Working coordinates: S(x) for transported kernels, x otherwise.
  void prepare(std::span<const double> x, std::span<double> out) const {
    for (std::size_t d = 0; d < x.size(); ++d) out[d] = transported_ ? map_.forward(x[d]) : x[d];
  }
  std::vector<double> prepare_all(std::span<const double> rows) const {
    std::vector<double> out(rows.size());
    const std::size_t D = dim();
    for (std::size_t i = 0; i < rows.size() / D; ++i)
      prepare(rows.subspan(i * D, D), std::span(out).subspan(i * D, D));
    return out;
  }

  /// K on prepared coordinates.
  double operator()(std::span<const double> a, std::span<const double> b) const {
    if (!transported_) return eval(spec_, a, b);
    double u[kStack];
    std::vector<double> heap;
    double* pu = buffer(u, heap);
    for (std::size_t d = 0; d < a.size(); ++d) pu[d] = a[d] - b[d];
    return amplitude_ * localized_profile(family_, tau_, std::span<const double>(pu, a.size()));
  }

  /// K and its gradient in the original first argument x; a = prepared x,
  /// b = prepared second argument.
  double gradient_first(std::span<const double> a, std::span<const double> b, std::span<const double> x,
                        std::span<double> grad) const {
    if (!transported_) return eval_gradient(spec_, a, b, grad);
    double u[kStack];
    std::vector<double> heap;
    double* pu = buffer(u, heap);
    const std::size_t D = a.size();
    for (std::size_t d = 0; d < D; ++d) pu[d] = a[d] - b[d];
    const double k = amplitude_ * localized_profile_gradient(family_, tau_, std::span<const double>(pu, D), grad);
    for (std::size_t d = 0; d < D; ++d) {
      const bool inside = x[d] >= TransportMap::kClamp && x[d] <= 1.0 - TransportMap::kClamp;
      grad[d] *= inside ? amplitude_ * std::sqrt(std::numbers::pi) * std::exp(a[d] * a[d]) : 0.0;
    }
    return k;
  }

 private:
  static constexpr std::size_t kStack = 32;
  double* buffer(double* stack, std::vector<double>& heap) const {
    if (dim() <= kStack) return stack;
    heap.resize(dim());
    return heap.data();
  }

  KernelSpec spec_;
  bool transported_;
  TransportMap map_;
  Family family_ = Family::Exponential;
  double tau_ = 1.0;
  double amplitude_ = 1.0;
};

}  // namespace kdisc::internal
