#include "kdisc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <unordered_set>

#include "kdisc/errors.hpp"
#include "kdisc/special.hpp"

namespace kdisc {

// ---------------------------------------------------------------------------
// LatticeIndex

LatticeIndex::LatticeIndex(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw ValidationError("LatticeIndex: dimension must be >= 1");
}

LatticeIndex::LatticeIndex(std::size_t dimension, std::vector<Entry> entries)
    : LatticeIndex(dimension) {
  std::erase_if(entries, [](const Entry& e) { return e.value == 0; });
  std::sort(entries.begin(), entries.end());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].dim >= dimension)
      throw ValidationError("LatticeIndex: entry dimension " + std::to_string(entries[i].dim) +
                            " out of range for D=" + std::to_string(dimension));
    if (i > 0 && entries[i].dim == entries[i - 1].dim)
      throw ValidationError("LatticeIndex: repeated dimension " + std::to_string(entries[i].dim));
  }
  entries_ = std::move(entries);
}

LatticeIndex LatticeIndex::dense(std::span<const std::int64_t> values) {
  std::vector<Entry> entries;
  for (std::size_t d = 0; d < values.size(); ++d)
    if (values[d] != 0) entries.push_back({static_cast<std::uint32_t>(d), values[d]});
  return LatticeIndex(values.size(), std::move(entries));
}

std::int64_t LatticeIndex::operator[](std::size_t d) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), d,
                             [](const Entry& e, std::size_t dim) { return e.dim < dim; });
  return (it != entries_.end() && it->dim == d) ? it->value : 0;
}

std::vector<std::int64_t> LatticeIndex::to_dense() const {
  std::vector<std::int64_t> out(dimension_, 0);
  for (const auto& e : entries_) out[e.dim] = e.value;
  return out;
}

LatticeIndex LatticeIndex::negated() const {
  LatticeIndex out = *this;
  for (auto& e : out.entries_) e.value = -e.value;
  return out;
}

std::size_t LatticeIndexHash::operator()(const LatticeIndex& a) const noexcept {
  std::size_t h = std::hash<std::size_t>{}(a.dimension());
  for (const auto& e : a.entries()) {
    h ^= std::hash<std::uint64_t>{}((std::uint64_t{e.dim} << 40) ^ static_cast<std::uint64_t>(e.value)) +
         0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

// ---------------------------------------------------------------------------
// CoefficientProfile

CoefficientProfile::CoefficientProfile(std::size_t dimension, Fn r, double total_1d,
                                       std::optional<Fn> envelope)
    : dimension_(dimension), r_(std::move(r)), total_1d_(total_1d), envelope_(std::move(envelope)) {
  if (dimension == 0) throw ValidationError("CoefficientProfile: dimension must be >= 1");
  if (!r_) throw ValidationError("CoefficientProfile: missing coefficient function");
  if (!(std::isfinite(total_1d) && total_1d >= 1.0))
    throw ValidationError("CoefficientProfile: per-dimension total must be finite and >= 1");
}

CoefficientProfile CoefficientProfile::for_family(Family family, std::size_t dimension, double tau,
                                                  std::optional<double> ratio) {
  if (!(std::isfinite(tau) && tau > 0.0))
    throw ValidationError("CoefficientProfile: tau must be finite and positive");
  constexpr double pi = std::numbers::pi;
  switch (family) {
    case Family::Exponential: {
      const double c = 4.0 * pi * pi / (tau * tau);
      const double total = 0.5 * tau / std::tanh(0.5 * tau);
      return CoefficientProfile(
          dimension, [c](std::int64_t k) { double kk = double(k); return 1.0 / (1.0 + c * kk * kk); },
          total);
    }
    case Family::Multiquadric: {
      const double rho = ratio.value_or(std::exp(-pi * tau));
      return CoefficientProfile(
          dimension, [rho](std::int64_t k) { return std::pow(rho, double(k < 0 ? -k : k)); },
          (1.0 + rho) / (1.0 - rho));
    }
    case Family::Gaussian: {
      const double q = ratio.value_or(std::exp(-pi * pi * tau));
      return CoefficientProfile(
          dimension, [q](std::int64_t k) { double kk = double(k); return std::pow(q, kk * kk); },
          theta3(0.0, q));
    }
    case Family::Truncated: {
      if (tau < 1.0) throw ValidationError("CoefficientProfile: truncated profile needs tau >= 1");
      auto r = [tau](std::int64_t k) {
        if (k == 0) return 1.0;
        // sin(pi x) with x reduced to its nearest integer first, so the zeros
        // at integer x are exact.
        const double x = double(k) / tau;
        const double frac = x - std::nearbyint(x);
        if (std::abs(frac) < 1e-12) return 0.0;
        const double s = std::sin(pi * frac) / (pi * x);
        return s * s;
      };
      // sinc^2(pi k / tau) <= (tau / (pi k))^2, itself decreasing in |k|.
      auto env = [tau](std::int64_t k) {
        const double kk = double(k < 0 ? -k : k);
        if (kk == 0.0) return 1.0;
        return std::min(1.0, (tau / (pi * kk)) * (tau / (pi * kk)));
      };
      // Poisson summation: sum_k sinc^2(pi k / tau) = tau for tau >= 1.
      return CoefficientProfile(dimension, r, tau, Fn(env));
    }
  }
  throw ValidationError("CoefficientProfile: unknown family");
}

double CoefficientProfile::total() const { return std::pow(total_1d_, double(dimension_)); }

double CoefficientProfile::envelope(std::int64_t k) const {
  if (envelope_) return (*envelope_)(k);
  return r_(k);
}

double CoefficientProfile::coefficient(const LatticeIndex& alpha) const {
  if (alpha.dimension() != dimension_)
    throw ValidationError("coefficient: index dimension " + std::to_string(alpha.dimension()) +
                          " does not match profile dimension " + std::to_string(dimension_));
  const auto entries = alpha.entries();
  if (entries.empty()) return 1.0;
  // Small fixed buffer; indices with many nonzeros fall back to the heap.
  double stack_buf[16];
  std::vector<double> heap_buf;
  double* f = stack_buf;
  if (entries.size() > 16) {
    heap_buf.resize(entries.size());
    f = heap_buf.data();
  }
  for (std::size_t i = 0; i < entries.size(); ++i) f[i] = r_(entries[i].value);
  std::sort(f, f + entries.size(), std::greater<>());
  double p = 1.0;
  for (std::size_t i = 0; i < entries.size(); ++i) p *= f[i];
  return p;
}

void CoefficientProfile::validate(std::int64_t probe) const {
  const double r0 = r_(0);
  if (r0 != 1.0) throw ValidationError("CoefficientProfile: r(0) must equal 1");
  double prev = r0;
  for (std::int64_t k = 1; k <= probe; ++k) {
    const double a = r_(k), b = r_(-k);
    if (!std::isfinite(a) || a < 0.0)
      throw ValidationError("CoefficientProfile: r(" + std::to_string(k) + ") is negative or not finite");
    if (a != b) throw ValidationError("CoefficientProfile: r is not symmetric at k=" + std::to_string(k));
    if (envelope_) {
      if (a > (*envelope_)(k) * (1.0 + 1e-12))
        throw ValidationError("CoefficientProfile: envelope below r at k=" + std::to_string(k));
    } else if (a > prev) {
      throw ValidationError("CoefficientProfile: r is not nonincreasing in |k| at k=" +
                            std::to_string(k));
    }
    prev = a;
  }
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

/// Lazily materialized 1-D order: ranked lattice values k_0 = 0, k_1, k_2, ...
/// by decreasing r(k) (ties: smaller |k| first, then negative before positive
/// is irrelevant because we break by value ascending).
class OneDimOrder {
 public:
  explicit OneDimOrder(const CoefficientProfile& p) : p_(p) {}

  /// True when rank `rank` exists (its coefficient is positive).
  bool has(std::size_t rank) {
    while (rank >= ks_.size() && !exhausted_) extend();
    return rank < ks_.size();
  }
  std::int64_t value(std::size_t rank) const { return ks_[rank]; }
  double coef(std::size_t rank) const { return rs_[rank]; }

 private:
  void extend() {
    if (p_.monotone()) {
      // Order 0, -1, +1, -2, +2, ...: r(-j) == r(j), and the final sort of the
      // tie group puts the canonical order back.
      const std::size_t rank = ks_.size();
      const std::int64_t j = std::int64_t((rank + 1) / 2);
      const std::int64_t k = (rank == 0) ? 0 : ((rank % 2 == 1) ? -j : j);
      const double r = p_.r(k);
      if (!(r > 0.0)) {
        exhausted_ = true;
        return;
      }
      ks_.push_back(k);
      rs_.push_back(r);
      return;
    }
    // Non-monotone: rank all |k| <= K, keep the prefix the envelope certifies.
    radius_ = radius_ == 0 ? 64 : radius_ * 2;
    if (radius_ > (std::int64_t{1} << 24))
      throw NumericalError("enumerate_decreasing: 1-D order did not certify within |k| <= 2^24");
    std::vector<std::pair<double, std::int64_t>> cand;
    cand.reserve(std::size_t(2 * radius_ + 1));
    for (std::int64_t k = -radius_; k <= radius_; ++k) {
      const double r = p_.r(k);
      if (r > 0.0) cand.emplace_back(r, k);
    }
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const double bound = p_.envelope(radius_ + 1);
    std::size_t certified = 0;
    while (certified < cand.size() && cand[certified].first > bound) ++certified;
    ks_.clear();
    rs_.clear();
    for (std::size_t i = 0; i < certified; ++i) {
      ks_.push_back(cand[i].second);
      rs_.push_back(cand[i].first);
    }
    if (bound == 0.0) exhausted_ = true;
  }

  const CoefficientProfile& p_;
  std::vector<std::int64_t> ks_;
  std::vector<double> rs_;
  std::int64_t radius_ = 0;
  bool exhausted_ = false;
};

/// Search node: sparse (dimension, rank) pairs sorted by dimension.
struct RankVec {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  friend bool operator==(const RankVec&, const RankVec&) = default;
};

struct RankVecHash {
  std::size_t operator()(const RankVec& v) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (auto [d, r] : v.e) {
      h ^= (std::size_t{d} << 32) | r;
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return h;
  }
};

struct Node {
  double coef;
  std::uint64_t order;  // insertion order, for a deterministic heap
  RankVec ranks;
};

struct NodeLess {
  bool operator()(const Node& a, const Node& b) const {
    if (a.coef != b.coef) return a.coef < b.coef;
    return a.order > b.order;
  }
};

bool tie_key_less(const LatticeTerm& a, const LatticeTerm& b) {
  if (a.coefficient != b.coefficient) return a.coefficient > b.coefficient;
  if (a.index.nonzeros() != b.index.nonzeros()) return a.index.nonzeros() < b.index.nonzeros();
  return std::lexicographical_compare(a.index.entries().begin(), a.index.entries().end(),
                                      b.index.entries().begin(), b.index.entries().end());
}

}  // namespace

namespace {
std::vector<LatticeTerm> enumerate_impl(const CoefficientProfile& profile, std::size_t count, bool allow_fewer);
}  // namespace

std::vector<LatticeTerm> enumerate_decreasing(const CoefficientProfile& profile, std::size_t count) {
  return enumerate_impl(profile, count, false);
}

std::vector<LatticeTerm> enumerate_at_most(const CoefficientProfile& profile, std::size_t count) {
  return enumerate_impl(profile, count, true);
}

namespace {
std::vector<LatticeTerm> enumerate_impl(const CoefficientProfile& profile, std::size_t count, bool allow_fewer) {
  if (count == 0) throw ValidationError("enumerate_decreasing: count must be >= 1");
  profile.validate();
  const std::size_t D = profile.dimension();
  OneDimOrder order(profile);
  order.has(0);

  auto coef_of = [&](const RankVec& v) {
    double buf[16];
    std::vector<double> heap;
    double* f = buf;
    if (v.e.size() > 16) {
      heap.resize(v.e.size());
      f = heap.data();
    }
    for (std::size_t i = 0; i < v.e.size(); ++i) f[i] = order.coef(v.e[i].second);
    std::sort(f, f + v.e.size(), std::greater<>());
    double p = 1.0;
    for (std::size_t i = 0; i < v.e.size(); ++i) p *= f[i];
    return p;
  };

  std::priority_queue<Node, std::vector<Node>, NodeLess> heap;
  std::unordered_set<RankVec, RankVecHash> seen;
  std::uint64_t pushes = 0;
  heap.push(Node{1.0, pushes++, RankVec{}});
  seen.insert(RankVec{});

  std::vector<Node> popped;
  popped.reserve(count + 16);
  double boundary = 0.0;
  while (!heap.empty()) {
    if (popped.size() >= count && heap.top().coef != boundary) break;
    Node cur = heap.top();
    heap.pop();
    if (popped.size() + 1 == count) boundary = cur.coef;
    // Children: advance one dimension's rank by one.
    for (std::uint32_t d = 0; d < D; ++d) {
      RankVec child = cur.ranks;
      auto it = std::lower_bound(child.e.begin(), child.e.end(), d,
                                 [](const auto& p, std::uint32_t dim) { return p.first < dim; });
      std::uint32_t next_rank;
      if (it != child.e.end() && it->first == d) {
        next_rank = it->second + 1;
        if (!order.has(next_rank)) continue;
        it->second = next_rank;
      } else {
        next_rank = 1;
        if (!order.has(next_rank)) continue;
        child.e.insert(it, {d, next_rank});
      }
      if (!seen.insert(child).second) continue;
      const double c = coef_of(child);
      heap.push(Node{c, pushes++, std::move(child)});
    }
    popped.push_back(std::move(cur));
  }
  if (popped.size() < count && !allow_fewer)
    throw ValidationError("enumerate_decreasing: profile has fewer than " + std::to_string(count) +
                          " positive coefficients");

  std::vector<LatticeTerm> terms;
  terms.reserve(popped.size());
  for (const auto& n : popped) {
    std::vector<LatticeIndex::Entry> entries;
    entries.reserve(n.ranks.e.size());
    for (auto [d, r] : n.ranks.e) entries.push_back({d, order.value(r)});
    terms.push_back(LatticeTerm{LatticeIndex(D, std::move(entries)), n.coef});
  }
  std::sort(terms.begin(), terms.end(), tie_key_less);
  if (terms.size() > count) terms.erase(terms.begin() + std::ptrdiff_t(count), terms.end());
  return terms;
}
}  // namespace

double partial_sum(const CoefficientProfile& profile, std::size_t n) {
  const auto terms = enumerate_at_most(profile, n);
  double s = 0.0;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) s += it->coefficient;
  return s;
}

double tail_mass(const CoefficientProfile& profile, std::size_t n) {
  const double total = profile.total();
  const auto head = enumerate_at_most(profile, n);
  // Every positive coefficient is in the head; what is left underflows.
  if (head.size() < n) return 0.0;
  double sum = 0.0;
  for (auto it = head.rbegin(); it != head.rend(); ++it) sum += it->coefficient;
  const double tail = total - sum;
  // When the tail sits at the roundoff level of T^D the subtraction carries no
  // digits; sum the next terms directly instead (fast-decaying profiles only
  // reach this branch, so a short continuation captures the tail).
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (tail > 64.0 * eps * total) return tail;
  const std::size_t extra = std::max<std::size_t>(64, n);
  const auto more = enumerate_at_most(profile, n + extra);
  double direct = 0.0;
  for (std::size_t i = more.size(); i-- > n;) direct += more[i].coefficient;
  return direct;
}

double asymptotic_discrepancy(const CoefficientProfile& profile, std::size_t n) {
  if (n == 0) throw ValidationError("asymptotic_discrepancy: N must be >= 1");
  return std::sqrt(tail_mass(profile, n) / double(n));
}

}  // namespace kdisc
