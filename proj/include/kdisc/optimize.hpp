#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kdisc/discrepancy.hpp"
#include "kdisc/kernels.hpp"
#include "kdisc/lattice.hpp"
#include "kdisc/pointset.hpp"

namespace kdisc {

enum class StepSchedule { Constant, Backtracking };

/// How iterates are kept inside the unit cube.
enum class Projection { Auto, Clamp, Wrap };

struct OptimizerConfig {
  std::size_t max_iterations = 10000;
  /// Initial step; 0 selects 0.1 / N.
  double step_size = 0.0;
  StepSchedule schedule = StepSchedule::Backtracking;
  /// Stop when the gradient norm drops below this; 0 selects 1e-9 * N.
  double gradient_tolerance = 0.0;
  /// Stop when an accepted step lowers the objective by less than this
  /// (relative to max(1, |objective|)).
  double objective_tolerance = 1e-15;
  /// Floor on objective_tolerance for Monte-Carlo objectives.
  static constexpr double kMonteCarloObjectiveTolerance = 1e-9;
  /// Auto wraps mod 1 for periodic kernels and clamps otherwise.
  Projection projection = Projection::Auto;
  /// Seed of the frozen Monte-Carlo sample set (transported kernels).
  std::uint32_t seed = 0;
  /// Frozen samples behind the Monte-Carlo objective of kernels without
  /// closed-form integrals.
  std::size_t mc_samples = 4096;
  /// Restart from the best iterate with a 10x step after this many iterations
  /// without relative progress above objective_tolerance * 1e6.
  std::size_t stall_window = 50;
  std::size_t max_restarts = 3;

  /// Throws ValidationError on nonpositive tolerances or zero iterations.
  void validate() const;
};

/// Squared discrepancy E^2(Y) as an objective over the N x D coordinates, with
/// closed-form integrals when the kernel has them and a frozen Monte-Carlo
/// sample set otherwise. Gradients are row-major (point outer).
class PhysicalObjective {
 public:
  PhysicalObjective(const KernelSpec& spec, std::size_t n, std::size_t mc_samples = 4096,
                    std::uint32_t seed = 0);
  ~PhysicalObjective();
  PhysicalObjective(PhysicalObjective&&) noexcept;
  PhysicalObjective& operator=(PhysicalObjective&&) noexcept;

  double value(const PointSet& y) const;
  double value_gradient(const PointSet& y, std::span<double> grad) const;
  bool uses_monte_carlo() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct DescentResult {
  PointSet points;
  DiscrepancyReport report;   // exact / closed form where available, otherwise the frozen-sample estimate
  std::vector<double> trace;  // objective (E^2) after every accepted iteration, starting with Y0
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  std::string stop_reason;
};

/// Gradient descent on E^2 (the semi-discrete flow dY/dt = -grad E^2). With
/// backtracking the trace is nonincreasing and the result never worse than Y0.
/// Throws NumericalError naming the iteration if a gradient is not finite.
DescentResult descend_physical(const KernelSpec& spec, PointSet y0, const OptimizerConfig& config = {});

/// The annihilation system sum_m exp(2 i pi <y^m, alpha^n>) = 0 for N nonzero
/// target indices.
struct Cond1Problem {
  std::size_t dim = 0;
  std::vector<LatticeTerm> targets;

  /// The N largest nonzero-index coefficients of the profile.
  static Cond1Problem from_profile(const CoefficientProfile& profile, std::size_t n);
  /// Throws ValidationError on a zero target or a dimension mismatch.
  void validate() const;
};

/// I(Y) = sum_n |S_n|^2 with S_n = sum_m exp(2 i pi <y^m, alpha^n>), and its
/// gradient (row-major) when `grad` is nonempty.
double cond1_functional(const Cond1Problem& problem, const PointSet& y, std::span<double> grad = {});

struct Cond1Result {
  PointSet points;
  double residual = 0.0;  // I(Y) / N^2
  bool success = false;   // residual < 1e-8
  bool infeasible = false;
  std::size_t iterations = 0;
};

/// Minimizes I(Y) by backtracking gradient descent with wrap-around.
/// N = 1 with a nonzero target is infeasible (|exp| = 1): reported with the
/// residual floor and the infeasible flag rather than iterated.
Cond1Result solve_cond1(const Cond1Problem& problem, PointSet y0, const OptimizerConfig& config = {});

/// Tensor grid y = (n_d / R_d)_d, N = prod R_d points, first axis slowest.
PointSet canonical_grid(std::span<const std::size_t> r);

/// Midpoints (2n - 1) / (2N), n = 1..N.
PointSet midpoint_1d(std::size_t n);

}  // namespace kdisc
