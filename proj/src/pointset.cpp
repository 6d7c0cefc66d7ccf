#include "kdisc/pointset.hpp"

#include <cmath>
#include <string>

#include "kdisc/errors.hpp"

namespace kdisc {

PointSet::PointSet(std::size_t n, std::size_t d) : n_(n), d_(d), coords_(n * d, 0.0) {
  if (n == 0 || d == 0) throw ValidationError("PointSet: N and D must be >= 1");
}

PointSet::PointSet(std::size_t n, std::size_t d, std::vector<double> coords)
    : n_(n), d_(d), coords_(std::move(coords)) {
  if (n == 0 || d == 0) throw ValidationError("PointSet: N and D must be >= 1");
  if (coords_.size() != n * d)
    throw ValidationError("PointSet: expected " + std::to_string(n * d) + " coordinates, got " +
                          std::to_string(coords_.size()));
  validate();
}

std::vector<double> PointSet::dim_major() const {
  std::vector<double> out(coords_.size());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < d_; ++k) out[k * n_ + i] = coords_[i * d_ + k];
  return out;
}

void PointSet::validate() const {
  for (std::size_t j = 0; j < coords_.size(); ++j) {
    const double c = coords_[j];
    if (!std::isfinite(c) || c < 0.0 || c > 1.0)
      throw ValidationError("PointSet: coordinate " + std::to_string(j % d_) + " of point " +
                            std::to_string(j / d_) + " is not a finite value in [0,1]");
  }
}

}  // namespace kdisc
