#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kdisc {

/// N points in [0,1]^D, stored row-major (point index outer, dimension inner).
class PointSet {
 public:
  PointSet() = default;
  /// Zero-initialized set of n points in dimension d.
  PointSet(std::size_t n, std::size_t d);
  /// Takes ownership of row-major coordinates; validates finiteness and [0,1] range.
  PointSet(std::size_t n, std::size_t d, std::vector<double> coords);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return d_; }

  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * d_, d_}; }
  std::span<double> point(std::size_t i) { return {coords_.data() + i * d_, d_}; }
  double operator()(std::size_t i, std::size_t k) const { return coords_[i * d_ + k]; }
  double& operator()(std::size_t i, std::size_t k) { return coords_[i * d_ + k]; }

  std::span<const double> coords() const noexcept { return coords_; }
  std::span<double> coords() noexcept { return coords_; }

  /// Dimension-major copy (D x N), the layout the pair-sum kernels stream over.
  std::vector<double> dim_major() const;

  /// Throws ValidationError unless every coordinate is finite and in [0,1].
  void validate() const;

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> coords_;
};

}  // namespace kdisc
