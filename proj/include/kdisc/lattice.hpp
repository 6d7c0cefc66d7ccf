#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kdisc/family.hpp"

namespace kdisc {

/// An element of the canonical dual lattice Z^D. Only nonzero entries are
/// stored, sorted by dimension, so D = 128 indices with a handful of nonzero
/// coordinates stay small.
class LatticeIndex {
 public:
  struct Entry {
    std::uint32_t dim;
    std::int64_t value;
    friend auto operator<=>(const Entry&, const Entry&) = default;
  };

  /// The zero index in dimension `dimension`.
  explicit LatticeIndex(std::size_t dimension);
  /// Entries may come in any order; zero values are dropped. Throws
  /// ValidationError on an out-of-range or repeated dimension.
  LatticeIndex(std::size_t dimension, std::vector<Entry> entries);
  static LatticeIndex dense(std::span<const std::int64_t> values);

  std::size_t dimension() const noexcept { return dimension_; }
  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }
  bool is_zero() const noexcept { return entries_.empty(); }
  std::int64_t operator[](std::size_t d) const;
  std::vector<std::int64_t> to_dense() const;
  LatticeIndex negated() const;

  friend bool operator==(const LatticeIndex&, const LatticeIndex&) = default;

 private:
  std::size_t dimension_;
  std::vector<Entry> entries_;
};

struct LatticeIndexHash {
  std::size_t operator()(const LatticeIndex& a) const noexcept;
};

/// A dual-lattice index together with its Fourier coefficient rho(alpha).
struct LatticeTerm {
  LatticeIndex index;
  double coefficient;
};

/// Tensor-structured Fourier profile rho(alpha) = prod_d r(alpha_d).
///
/// r must satisfy r(0) = 1 and r(-k) = r(k). Monotone profiles (r nonincreasing
/// in |k|) need nothing else. A profile that oscillates, like the truncated
/// kernel's sinc^2, must supply an envelope e(k) >= sup_{|j| >= k} r(j) so the
/// enumeration can certify its 1-D ordering.
class CoefficientProfile {
 public:
  using Fn = std::function<double(std::int64_t)>;

  CoefficientProfile(std::size_t dimension, Fn r, double total_1d,
                     std::optional<Fn> envelope = std::nullopt);

  /// Normalized profile of the periodic kernel of `family` with parameter tau.
  /// `ratio` is the nome q (Gaussian) or geometric ratio (multiquadric); pass a
  /// value to avoid the rounding of exp(-pi^2 tau) for the default parameters.
  static CoefficientProfile for_family(Family family, std::size_t dimension, double tau,
                                       std::optional<double> ratio = std::nullopt);

  std::size_t dimension() const noexcept { return dimension_; }
  double r(std::int64_t k) const { return r_(k); }
  /// T = sum_k r(k).
  double total_1d() const noexcept { return total_1d_; }
  /// T^D = sum over Z^D of rho.
  double total() const;
  bool monotone() const noexcept { return !envelope_.has_value(); }
  double envelope(std::int64_t k) const;

  /// rho(alpha); factors multiplied in descending order so equal multisets of
  /// factors give bitwise-equal products.
  double coefficient(const LatticeIndex& alpha) const;

  /// Checks r(0) = 1, symmetry, finiteness, and monotonicity (or the envelope
  /// bound) for |k| <= probe. Throws ValidationError.
  void validate(std::int64_t probe = 64) const;

 private:
  std::size_t dimension_;
  Fn r_;
  double total_1d_;
  std::optional<Fn> envelope_;
};

/// The `count` largest coefficients over Z^D in nonincreasing order (zero
/// coefficients never appear). Ties are ordered by number of nonzero entries,
/// then lexicographically by (dimension, value) pairs.
std::vector<LatticeTerm> enumerate_decreasing(const CoefficientProfile& profile,
                                              std::size_t count);

/// Like enumerate_decreasing, but returns fewer than `count` terms instead of
/// throwing when the profile has fewer positive coefficients (a Gaussian
/// profile underflows to zero beyond a few dozen frequencies per axis).
std::vector<LatticeTerm> enumerate_at_most(const CoefficientProfile& profile, std::size_t count);

/// Sum of the first n enumerated coefficients (all of them if fewer).
double partial_sum(const CoefficientProfile& profile, std::size_t n);

/// T^D minus the sum of the first n coefficients, clamped at 0; 0 when the
/// profile has at most n positive coefficients.
double tail_mass(const CoefficientProfile& profile, std::size_t n);

/// sqrt(tail_mass(n) / n), the tabulated asymptotic discrepancy.
double asymptotic_discrepancy(const CoefficientProfile& profile, std::size_t n);

}  // namespace kdisc
