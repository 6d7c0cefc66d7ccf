#include "kdisc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>

#include "kdisc/errors.hpp"
#include "kdisc/special.hpp"

namespace kdisc {

namespace detail {

struct SeedNode {
  Family family;
};
struct PeriodicNode {
  Family family;
  double tau;
  CoefficientProfile profile;
  PeriodicFactor factor;
};
struct TransportedNode {
  Family family;
  double tau;
  double beta;
  double amplitude;  // multiplies the localized profile
};
struct SplineNode {};
struct TensorNode {
  std::vector<KernelSpec> factors;
};
struct SumNode {
  double a, b;
  std::vector<KernelSpec> operands;
};
struct ProductNode {
  std::vector<KernelSpec> operands;
};
struct NormalizedNode {
  std::vector<KernelSpec> operands;
};

struct KernelNode {
  std::size_t dim;
  std::variant<SeedNode, PeriodicNode, TransportedNode, SplineNode, TensorNode, SumNode, ProductNode,
               NormalizedNode>
      v;
};

}  // namespace detail

namespace {

constexpr double kPi = std::numbers::pi;
using detail::KernelNode;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(std::size_t dim) {
  if (dim == 0) throw ValidationError("kernel dimension must be >= 1");
}

void require_positive(double v, const char* what) {
  if (!(std::isfinite(v) && v > 0.0))
    throw ValidationError(std::string(what) + " must be finite and positive");
}

void check_points(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != spec.dim() || y.size() != spec.dim())
    throw ValidationError("kernel " + spec.id() + " has dimension " + std::to_string(spec.dim()) +
                          " but points have dimensions " + std::to_string(x.size()) + " and " +
                          std::to_string(y.size()));
  for (std::size_t d = 0; d < x.size(); ++d)
    if (!std::isfinite(x[d]) || !std::isfinite(y[d]))
      throw ValidationError("kernel evaluation: non-finite coordinate");
}

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// e^{z^2} erfc(z) for z >= 0, stable until erfc underflows (z ~ 26).
double scaled_erfc(double z) { return std::exp(z * z) * std::erfc(z); }

// ---- seed kernels ------------------------------------------------------------

double seed_eval(Family f, std::span<const double> x, std::span<const double> y, double* g) {
  const std::size_t D = x.size();
  switch (f) {
    case Family::Exponential: {
      double l1 = 0.0;
      for (std::size_t d = 0; d < D; ++d) l1 += std::abs(x[d] - y[d]);
      const double k = std::exp(-l1);
      if (g)
        for (std::size_t d = 0; d < D; ++d) g[d] = -sign0(x[d] - y[d]) * k;
      return k;
    }
    case Family::Multiquadric: {
      double r2 = 0.0;
      for (std::size_t d = 0; d < D; ++d) r2 += (x[d] - y[d]) * (x[d] - y[d]);
      const double e = -0.5 * double(D + 1);
      const double k = std::pow(1.0 + r2, e);
      if (g)
        for (std::size_t d = 0; d < D; ++d) g[d] = 2.0 * e * (x[d] - y[d]) * k / (1.0 + r2);
      return k;
    }
    case Family::Gaussian: {
      double r2 = 0.0;
      for (std::size_t d = 0; d < D; ++d) r2 += (x[d] - y[d]) * (x[d] - y[d]);
      const double k = std::exp(-0.5 * r2);
      if (g)
        for (std::size_t d = 0; d < D; ++d) g[d] = -(x[d] - y[d]) * k;
      return k;
    }
    case Family::Truncated: {
      double r2 = 0.0;
      for (std::size_t d = 0; d < D; ++d) r2 += (x[d] - y[d]) * (x[d] - y[d]);
      const double r = std::sqrt(r2);
      if (r >= 1.0) {
        if (g) std::fill(g, g + D, 0.0);
        return 0.0;
      }
      const double k = std::pow(1.0 - r, double(D));
      if (g) {
        const double dk = r > 0.0 ? -double(D) * std::pow(1.0 - r, double(D) - 1.0) / r : 0.0;
        for (std::size_t d = 0; d < D; ++d) g[d] = dk * (x[d] - y[d]);
      }
      return k;
    }
  }
  return 0.0;
}

// ---- transported kernels -----------------------------------------------------

// Localized profile at u and, optionally, its gradient in u.
double localized(Family f, double tau, std::span<const double> u, double* g) {
  const std::size_t D = u.size();
  switch (f) {
    case Family::Exponential: {
      double l1 = 0.0;
      for (double v : u) l1 += std::abs(v);
      const double k = std::exp(-tau * l1);
      if (g)
        for (std::size_t d = 0; d < D; ++d) g[d] = -tau * sign0(u[d]) * k;
      return k;
    }
    case Family::Multiquadric: {
      double r2 = 0.0;
      for (double v : u) r2 += v * v;
      const double base = 1.0 + tau * tau * r2;
      const double e = -0.5 * double(D + 1);
      const double k = std::pow(base, e);
      if (g)
        for (std::size_t d = 0; d < D; ++d) g[d] = e * k / base * 2.0 * tau * tau * u[d];
      return k;
    }
    case Family::Gaussian: {
      double r2 = 0.0;
      for (double v : u) r2 += v * v;
      const double k = std::exp(-tau * tau * r2);
      if (g)
        for (std::size_t d = 0; d < D; ++d) g[d] = -2.0 * tau * tau * u[d] * k;
      return k;
    }
    case Family::Truncated: {
      double r2 = 0.0;
      for (double v : u) r2 += v * v;
      const double base = 1.0 + tau * r2;
      const double k = std::pow(base, -double(D));
      if (g)
        for (std::size_t d = 0; d < D; ++d) g[d] = -double(D) * k / base * 2.0 * tau * u[d];
      return k;
    }
  }
  return 0.0;
}

// ---- spline ------------------------------------------------------------------

double spline_1d(double x, double y) { return x <= y ? x * (1.0 - y) : y * (1.0 - x); }

double spline_1d_dx(double x, double y) {
  if (x < y) return 1.0 - y;
  if (x > y) return -y;
  return 0.5 - y;  // average of the one-sided slopes
}

// prod_d f_d and the gradient prod_{e != d} f_e * f'_d, via prefix/suffix
// products (no division, so zero factors are fine).
double product_with_gradient(std::span<const double> f, std::span<const double> df, double* g) {
  const std::size_t D = f.size();
  if (!g) {
    double p = 1.0;
    for (double v : f) p *= v;
    return p;
  }
  std::vector<double> prefix(D + 1, 1.0);
  for (std::size_t d = 0; d < D; ++d) prefix[d + 1] = prefix[d] * f[d];
  double suffix = 1.0;
  for (std::size_t d = D; d-- > 0;) {
    g[d] = prefix[d] * suffix * df[d];
    suffix *= f[d];
  }
  return prefix[D];
}

// ---- generic evaluation --------------------------------------------------------

double eval_impl(const KernelSpec& spec, std::span<const double> x, std::span<const double> y,
                 double* g);

double eval_impl(const KernelSpec& spec, std::span<const double> x, std::span<const double> y,
                 double* g) {
  const std::size_t D = spec.dim();
  return std::visit(
      Overloaded{
          [&](const detail::SeedNode& n) { return seed_eval(n.family, x, y, g); },
          [&](const detail::PeriodicNode& n) {
            std::vector<double> f(D), df(D);
            for (std::size_t d = 0; d < D; ++d) {
              if (g)
                f[d] = n.factor.value_derivative(x[d] - y[d], df[d]);
              else
                f[d] = n.factor.value(x[d] - y[d]);
            }
            return product_with_gradient(f, df, g);
          },
          [&](const detail::TransportedNode& n) {
            TransportMap map(D);
            std::vector<double> u(D);
            for (std::size_t d = 0; d < D; ++d) u[d] = map.forward(x[d]) - map.forward(y[d]);
            const double k = n.amplitude * localized(n.family, n.tau, u, g);
            if (g)
              for (std::size_t d = 0; d < D; ++d) g[d] *= n.amplitude * map.derivative(x[d]);
            return k;
          },
          [&](const detail::SplineNode&) {
            std::vector<double> f(D), df(D);
            for (std::size_t d = 0; d < D; ++d) {
              f[d] = spline_1d(x[d], y[d]);
              df[d] = spline_1d_dx(x[d], y[d]);
            }
            return product_with_gradient(f, df, g);
          },
          [&](const detail::TensorNode& n) {
            std::vector<double> f(D), df(D);
            for (std::size_t d = 0; d < D; ++d)
              f[d] = eval_impl(n.factors[d], x.subspan(d, 1), y.subspan(d, 1), g ? &df[d] : nullptr);
            return product_with_gradient(f, df, g);
          },
          [&](const detail::SumNode& n) {
            std::vector<double> g2(g ? D : 0);
            const double k1 = eval_impl(n.operands[0], x, y, g);
            const double k2 = eval_impl(n.operands[1], x, y, g ? g2.data() : nullptr);
            if (g)
              for (std::size_t d = 0; d < D; ++d) g[d] = n.a * g[d] + n.b * g2[d];
            return n.a * k1 + n.b * k2;
          },
          [&](const detail::ProductNode& n) {
            std::vector<double> g2(g ? D : 0);
            const double k1 = eval_impl(n.operands[0], x, y, g);
            const double k2 = eval_impl(n.operands[1], x, y, g ? g2.data() : nullptr);
            if (g)
              for (std::size_t d = 0; d < D; ++d) g[d] = g[d] * k2 + k1 * g2[d];
            return k1 * k2;
          },
          [&](const detail::NormalizedNode& n) {
            const KernelSpec& inner = n.operands[0];
            std::vector<double> gxx(g ? D : 0);
            const double kxy = eval_impl(inner, x, y, g);
            const double kxx = eval_impl(inner, x, x, g ? gxx.data() : nullptr);
            const double kyy = eval_impl(inner, y, y, nullptr);
            if (!(kxx > 0.0 && kyy > 0.0))
              throw NumericalError("normalized kernel: nonpositive diagonal");
            const double s = 1.0 / std::sqrt(kxx * kyy);
            if (g) {
              // d/dx K(x,x) = 2 dK/dx(x, y)|_{y=x} by symmetry.
              for (std::size_t d = 0; d < D; ++d)
                g[d] = g[d] * s - kxy * s * (2.0 * gxx[d]) / (2.0 * kxx);
            }
            return kxy * s;
          },
      },
      spec.node().v);
}

std::shared_ptr<const KernelNode> make_node(std::size_t dim, auto&& payload) {
  return std::make_shared<const KernelNode>(KernelNode{dim, std::forward<decltype(payload)>(payload)});
}

std::optional<Family> parse_family(std::string_view s) {
  if (s == "exp") return Family::Exponential;
  if (s == "mq") return Family::Multiquadric;
  if (s == "gauss") return Family::Gaussian;
  if (s == "trunc") return Family::Truncated;
  return std::nullopt;
}

}  // namespace

// ---- parameters ---------------------------------------------------------------

double default_tau(Localization loc, Family family, std::size_t dim) {
  require_dim(dim);
  const double D = double(dim);
  switch (loc) {
    case Localization::Seed:
      throw ValidationError("seed kernels have no tau parameter");
    case Localization::Periodic:
      switch (family) {
        case Family::Exponential: return std::sqrt(12.0 / D);
        case Family::Multiquadric: return std::log(2.0 * D + 1.0) / kPi;
        case Family::Gaussian: return std::log(2.0 * D) / (kPi * kPi);
        case Family::Truncated: return 1.0 + 1.0 / D;
      }
      break;
    case Localization::Transported:
      if (family == Family::Exponential) return std::sqrt(kPi) / D;
      return std::sqrt(2.0 / D);
  }
  throw ValidationError("unknown kernel family");
}

double default_beta(Family family, std::size_t dim, double tau) {
  require_dim(dim);
  require_positive(tau, "tau");
  const double D = double(dim);
  switch (family) {
    case Family::Exponential: return std::pow(scaled_erfc(0.5 * tau), D);
    case Family::Multiquadric: {
      const double z = 1.0 / tau;
      return std::pow(1.0 / (std::sqrt(kPi) * scaled_erfc(z) * z), D);
    }
    case Family::Gaussian: return std::pow(1.0 + tau * tau, 0.5 * D);
    case Family::Truncated: return 1.0;
  }
  throw ValidationError("unknown kernel family");
}

// ---- construction ----------------------------------------------------------------

KernelSpec KernelSpec::seed(Family family, std::size_t dim) {
  require_dim(dim);
  return KernelSpec(make_node(dim, detail::SeedNode{family}));
}

KernelSpec KernelSpec::periodic(Family family, std::size_t dim) {
  require_dim(dim);
  const double tau = default_tau(Localization::Periodic, family, dim);
  // Exact rational ratios for the default parameters: 1/(2D+1) and 1/(2D).
  std::optional<double> ratio;
  if (family == Family::Multiquadric) ratio = 1.0 / (2.0 * double(dim) + 1.0);
  if (family == Family::Gaussian) ratio = 1.0 / (2.0 * double(dim));
  return KernelSpec(make_node(
      dim, detail::PeriodicNode{family, tau, CoefficientProfile::for_family(family, dim, tau, ratio),
                                PeriodicFactor::make(family, tau, ratio)}));
}

KernelSpec KernelSpec::periodic(Family family, std::size_t dim, double tau) {
  require_dim(dim);
  require_positive(tau, "tau");
  return KernelSpec(make_node(
      dim, detail::PeriodicNode{family, tau, CoefficientProfile::for_family(family, dim, tau),
                                PeriodicFactor::make(family, tau)}));
}

KernelSpec KernelSpec::transported(Family family, std::size_t dim) {
  const double tau = default_tau(Localization::Transported, family, dim);
  return transported(family, dim, tau, default_beta(family, dim, tau));
}

KernelSpec KernelSpec::transported(Family family, std::size_t dim, double tau, double beta) {
  require_dim(dim);
  require_positive(tau, "tau");
  require_positive(beta, "beta");
  const double amplitude = family == Family::Exponential ? 1.0 / beta : beta;
  return KernelSpec(make_node(dim, detail::TransportedNode{family, tau, beta, amplitude}));
}

KernelSpec KernelSpec::spline(std::size_t dim) {
  require_dim(dim);
  return KernelSpec(make_node(dim, detail::SplineNode{}));
}

KernelSpec KernelSpec::tensor(std::vector<KernelSpec> factors) {
  if (factors.empty()) throw ValidationError("tensor: need at least one factor");
  for (const auto& f : factors)
    if (f.dim() != 1) throw ValidationError("tensor: every factor must be one-dimensional");
  const std::size_t dim = factors.size();
  return KernelSpec(make_node(dim, detail::TensorNode{std::move(factors)}));
}

KernelSpec KernelSpec::sum(double a, KernelSpec first, double b, KernelSpec second) {
  require_positive(a, "sum weight");
  require_positive(b, "sum weight");
  if (first.dim() != second.dim()) throw ValidationError("sum: operand dimensions differ");
  const std::size_t dim = first.dim();
  return KernelSpec(make_node(dim, detail::SumNode{a, b, {std::move(first), std::move(second)}}));
}

KernelSpec KernelSpec::product(KernelSpec first, KernelSpec second) {
  if (first.dim() != second.dim()) throw ValidationError("product: operand dimensions differ");
  const std::size_t dim = first.dim();
  return KernelSpec(make_node(dim, detail::ProductNode{{std::move(first), std::move(second)}}));
}

KernelSpec KernelSpec::normalized(KernelSpec inner) {
  const std::size_t dim = inner.dim();
  return KernelSpec(make_node(dim, detail::NormalizedNode{{std::move(inner)}}));
}

KernelSpec KernelSpec::parse(std::string_view id, std::size_t dim) {
  if (id == "spline") return spline(dim);
  const auto dash = id.find('-');
  if (dash != std::string_view::npos) {
    const auto loc = id.substr(0, dash);
    if (auto fam = parse_family(id.substr(dash + 1))) {
      if (loc == "seed") return seed(*fam, dim);
      if (loc == "per") return periodic(*fam, dim);
      if (loc == "tra") return transported(*fam, dim);
    }
  }
  throw ValidationError("unknown kernel id '" + std::string(id) +
                        "' (expected <seed|per|tra>-<exp|mq|gauss|trunc> or spline)");
}

KernelSpec combine(Combinator op, std::span<const KernelSpec> operands, std::span<const double> weights) {
  auto need = [&](std::size_t n_ops, std::size_t n_weights) {
    if (operands.size() != n_ops || weights.size() != n_weights)
      throw ValidationError("combine: wrong number of operands or weights");
  };
  switch (op) {
    case Combinator::Tensor:
      if (!weights.empty()) throw ValidationError("combine: tensor takes no weights");
      return KernelSpec::tensor(std::vector<KernelSpec>(operands.begin(), operands.end()));
    case Combinator::Sum:
      need(2, 2);
      return KernelSpec::sum(weights[0], operands[0], weights[1], operands[1]);
    case Combinator::Product:
      need(2, 0);
      return KernelSpec::product(operands[0], operands[1]);
    case Combinator::Normalize:
      need(1, 0);
      return KernelSpec::normalized(operands[0]);
  }
  throw ValidationError("combine: unknown combinator");
}

// ---- accessors ---------------------------------------------------------------------

KernelSpec::Kind KernelSpec::kind() const noexcept {
  return static_cast<Kind>(node_->v.index());
}

std::size_t KernelSpec::dim() const noexcept { return node_->dim; }

std::string KernelSpec::id() const {
  return std::visit(
      Overloaded{
          [](const detail::SeedNode& n) { return "seed-" + std::string(family_tag(n.family)); },
          [](const detail::PeriodicNode& n) { return "per-" + std::string(family_tag(n.family)); },
          [](const detail::TransportedNode& n) { return "tra-" + std::string(family_tag(n.family)); },
          [](const detail::SplineNode&) { return std::string("spline"); },
          [](const detail::TensorNode& n) {
            std::string s = "tensor(";
            for (std::size_t i = 0; i < n.factors.size(); ++i) s += (i ? "," : "") + n.factors[i].id();
            return s + ")";
          },
          [](const detail::SumNode& n) {
            return "sum(" + std::to_string(n.a) + "," + n.operands[0].id() + "," + std::to_string(n.b) +
                   "," + n.operands[1].id() + ")";
          },
          [](const detail::ProductNode& n) {
            return "product(" + n.operands[0].id() + "," + n.operands[1].id() + ")";
          },
          [](const detail::NormalizedNode& n) { return "normalized(" + n.operands[0].id() + ")"; },
      },
      node_->v);
}

Family KernelSpec::family() const {
  if (auto* n = std::get_if<detail::SeedNode>(&node_->v)) return n->family;
  if (auto* n = std::get_if<detail::PeriodicNode>(&node_->v)) return n->family;
  if (auto* n = std::get_if<detail::TransportedNode>(&node_->v)) return n->family;
  throw ValidationError("kernel " + id() + " has no family");
}

double KernelSpec::tau() const {
  if (auto* n = std::get_if<detail::PeriodicNode>(&node_->v)) return n->tau;
  if (auto* n = std::get_if<detail::TransportedNode>(&node_->v)) return n->tau;
  throw ValidationError("kernel " + id() + " has no tau parameter");
}

double KernelSpec::beta() const {
  if (auto* n = std::get_if<detail::TransportedNode>(&node_->v)) return n->beta;
  throw ValidationError("kernel " + id() + " has no beta parameter");
}

double KernelSpec::amplitude() const {
  if (auto* n = std::get_if<detail::TransportedNode>(&node_->v)) return n->amplitude;
  throw ValidationError("kernel " + id() + " is not transported");
}

const CoefficientProfile& KernelSpec::profile() const {
  if (auto* n = std::get_if<detail::PeriodicNode>(&node_->v)) return n->profile;
  throw ValidationError("kernel " + id() + " is not periodic");
}

const PeriodicFactor& KernelSpec::factor() const {
  if (auto* n = std::get_if<detail::PeriodicNode>(&node_->v)) return n->factor;
  throw ValidationError("kernel " + id() + " is not periodic");
}

std::span<const KernelSpec> KernelSpec::operands() const {
  return std::visit(Overloaded{
                        [](const detail::TensorNode& n) { return std::span<const KernelSpec>(n.factors); },
                        [](const detail::SumNode& n) { return std::span<const KernelSpec>(n.operands); },
                        [](const detail::ProductNode& n) { return std::span<const KernelSpec>(n.operands); },
                        [](const detail::NormalizedNode& n) { return std::span<const KernelSpec>(n.operands); },
                        [](const auto&) { return std::span<const KernelSpec>(); },
                    },
                    node_->v);
}

// ---- evaluation ------------------------------------------------------------------

double eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  check_points(spec, x, y);
  return eval_impl(spec, x, y, nullptr);
}

double eval_gradient(const KernelSpec& spec, std::span<const double> x, std::span<const double> y,
                     std::span<double> grad_x) {
  check_points(spec, x, y);
  if (grad_x.size() != spec.dim()) throw ValidationError("eval_gradient: gradient buffer has wrong size");
  return eval_impl(spec, x, y, grad_x.data());
}

double pseudo_distance(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  const double v = eval(spec, x, x) + eval(spec, y, y) - 2.0 * eval(spec, x, y);
  return v > 0.0 ? v : 0.0;
}

double fourier_coefficient(const KernelSpec& spec, const LatticeIndex& index) {
  return spec.profile().coefficient(index);
}

std::optional<double> kernel_mean(const KernelSpec& spec, std::span<const double> y) {
  if (y.size() != spec.dim()) throw ValidationError("kernel_mean: dimension mismatch");
  return std::visit(
      Overloaded{
          [](const detail::PeriodicNode&) -> std::optional<double> { return 1.0; },
          [&](const detail::SplineNode&) -> std::optional<double> {
            double p = 1.0;
            for (double v : y) p *= 0.5 * v * (1.0 - v);
            return p;
          },
          [&](const detail::TensorNode& n) -> std::optional<double> {
            double p = 1.0;
            for (std::size_t d = 0; d < n.factors.size(); ++d) {
              auto m = kernel_mean(n.factors[d], y.subspan(d, 1));
              if (!m) return std::nullopt;
              p *= *m;
            }
            return p;
          },
          [&](const detail::SumNode& n) -> std::optional<double> {
            auto m1 = kernel_mean(n.operands[0], y), m2 = kernel_mean(n.operands[1], y);
            if (!m1 || !m2) return std::nullopt;
            return n.a * *m1 + n.b * *m2;
          },
          [](const auto&) -> std::optional<double> { return std::nullopt; },
      },
      spec.node().v);
}

bool kernel_mean_gradient(const KernelSpec& spec, std::span<const double> y, std::span<double> grad) {
  if (y.size() != spec.dim() || grad.size() != spec.dim())
    throw ValidationError("kernel_mean_gradient: dimension mismatch");
  const std::size_t D = spec.dim();
  return std::visit(
      Overloaded{
          [&](const detail::PeriodicNode&) {
            std::fill(grad.begin(), grad.end(), 0.0);
            return true;
          },
          [&](const detail::SplineNode&) {
            std::vector<double> f(D), df(D);
            for (std::size_t d = 0; d < D; ++d) {
              f[d] = 0.5 * y[d] * (1.0 - y[d]);
              df[d] = 0.5 - y[d];
            }
            product_with_gradient(f, df, grad.data());
            return true;
          },
          [&](const detail::TensorNode& n) {
            std::vector<double> f(D), df(D);
            for (std::size_t d = 0; d < D; ++d) {
              auto m = kernel_mean(n.factors[d], y.subspan(d, 1));
              if (!m || !kernel_mean_gradient(n.factors[d], y.subspan(d, 1), std::span(&df[d], 1)))
                return false;
              f[d] = *m;
            }
            product_with_gradient(f, df, grad.data());
            return true;
          },
          [&](const detail::SumNode& n) {
            std::vector<double> g2(D);
            if (!kernel_mean_gradient(n.operands[0], y, grad) ||
                !kernel_mean_gradient(n.operands[1], y, g2))
              return false;
            for (std::size_t d = 0; d < D; ++d) grad[d] = n.a * grad[d] + n.b * g2[d];
            return true;
          },
          [](const auto&) { return false; },
      },
      spec.node().v);
}

std::optional<double> kernel_double_mean(const KernelSpec& spec) {
  return std::visit(
      Overloaded{
          [](const detail::PeriodicNode&) -> std::optional<double> { return 1.0; },
          [&](const detail::SplineNode&) -> std::optional<double> {
            return std::pow(12.0, -double(spec.dim()));
          },
          [](const detail::TensorNode& n) -> std::optional<double> {
            double p = 1.0;
            for (const auto& f : n.factors) {
              auto m = kernel_double_mean(f);
              if (!m) return std::nullopt;
              p *= *m;
            }
            return p;
          },
          [](const detail::SumNode& n) -> std::optional<double> {
            auto m1 = kernel_double_mean(n.operands[0]), m2 = kernel_double_mean(n.operands[1]);
            if (!m1 || !m2) return std::nullopt;
            return n.a * *m1 + n.b * *m2;
          },
          [](const auto&) -> std::optional<double> { return std::nullopt; },
      },
      spec.node().v);
}

// ---- transport ---------------------------------------------------------------------

TransportMap::TransportMap(std::size_t dim) : dim_(dim) { require_dim(dim); }

double TransportMap::forward(double x) const {
  const double c = std::clamp(x, kClamp, 1.0 - kClamp);
  return erfinv(2.0 * c - 1.0);
}

double TransportMap::derivative(double x) const {
  if (x < kClamp || x > 1.0 - kClamp) return 0.0;
  const double s = erfinv(2.0 * x - 1.0);
  return std::sqrt(kPi) * std::exp(s * s);
}

double TransportMap::inverse(double s) const { return 0.5 * std::erfc(-s); }

std::vector<double> TransportMap::apply(std::span<const double> x) const {
  if (x.size() != dim_) throw ValidationError("TransportMap: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) out[d] = forward(x[d]);
  return out;
}

double localized_profile(Family family, double tau, std::span<const double> u) {
  return localized(family, tau, u, nullptr);
}

double localized_profile_gradient(Family family, double tau, std::span<const double> u,
                                  std::span<double> grad) {
  if (grad.size() != u.size()) throw ValidationError("localized_profile_gradient: gradient buffer has wrong size");
  return localized(family, tau, u, grad.data());
}

}  // namespace kdisc
