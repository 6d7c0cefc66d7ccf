#pragma once

// Table, point-set and slice generation behind the `kdisc` executable. The
// functions return documents as strings so the executable only handles I/O.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kdisc/discrepancy.hpp"
#include "kdisc/kernels.hpp"
#include "kdisc/optimize.hpp"
#include "kdisc/pointset.hpp"

namespace kdisc::cli {

enum class Mode { Random, Optimized, Asymptotic };
enum class Format { Csv, Markdown };

Mode parse_mode(std::string_view s);
Format parse_format(std::string_view s);
std::string_view mode_name(Mode m);

/// Settings shared by every cell of a run.
struct RunSettings {
  OptimizerConfig optimizer{};
  /// Samples of the Monte-Carlo integrals used to *report* E for kernels
  /// without closed-form integrals (the descent uses optimizer.mc_samples).
  std::size_t mc_samples = std::size_t(1) << 16;
};

struct TableSpec {
  std::string kernel = "per-exp";
  Mode mode = Mode::Random;
  std::vector<std::size_t> n_list{16, 32, 64, 128, 256, 512};
  std::vector<std::size_t> d_list{1, 2, 4, 8, 16, 32, 64, 128};
  std::uint32_t seed = 0;
  Format format = Format::Csv;
  RunSettings settings{};
  /// Worker threads; 0 selects the machine parallelism.
  std::size_t threads = 0;

  /// Throws ValidationError on an unknown kernel, empty or zero list entries,
  /// or asymptotic mode with a non-periodic kernel.
  void validate() const;
};

struct Cell {
  std::size_t n = 0, d = 0;
  std::uint32_t seed = 0;
  double value = 0.0;
  /// Empty on success; otherwise why the cell holds the best value reached
  /// rather than a converged one.
  std::string flag;
};

struct Table {
  TableSpec spec;
  std::vector<Cell> cells;  // row-major: N outer, D inner
};

/// Result of the optimized-mode pipeline for one (kernel, N, D) cell.
struct OptimizedPoints {
  PointSet points;
  DiscrepancyReport report;
  std::size_t iterations = 0;
  /// COND1 residual I(Y)/N^2 of the refinement stage; negative when not run.
  double cond1_residual = -1.0;
  std::string stage;  // "descent", "cond1", or "cond1+descent"
};

/// Random start from `seed` -> gradient descent -> (periodic kernels) COND1
/// refinement from the descent result; the transported Gaussian additionally
/// tries a descent started from the periodic-Gaussian COND1 solution. The
/// candidate with the smallest objective wins.
OptimizedPoints optimize_points(const KernelSpec& spec, std::size_t n, std::uint32_t seed,
                                const RunSettings& settings = {});

/// E for one point set: closed form for periodic and spline kernels,
/// Monte Carlo (settings.mc_samples, seed + 1) otherwise.
DiscrepancyReport evaluate_points(const KernelSpec& spec, const PointSet& y, std::uint32_t seed,
                                  const RunSettings& settings = {});

/// One table cell; a NumericalError inside the optimizer is caught and
/// recorded in the flag with the best value available.
Cell compute_cell(const KernelSpec& spec, Mode mode, std::size_t n, std::uint32_t cell_seed,
                  const RunSettings& settings = {});

/// All cells, run on a job queue over spec.threads workers and assembled in
/// row-major order.
Table compute_table(const TableSpec& spec);

/// csv: `N,D1,...,D1_full,...,flags` with 3-decimal and 17-digit columns;
/// markdown: 3-decimal cells, flagged cells marked `*` and listed below.
std::string render_table(const Table& table);

/// Header `x0,...,x{D-1}` and N rows at 17 significant digits, preceded by
/// `#` metadata lines.
std::string points_csv(std::string_view kernel, std::size_t n, std::size_t d, Mode mode, std::uint32_t seed,
                       const RunSettings& settings = {});

/// Parses a document produced by points_csv.
PointSet read_points_csv(std::string_view text);

/// `t,value` at `resolution` >= 2 equispaced t in [0,1]: the 1-D periodic
/// factor for periodic kernels, K((t, 1/2, ...), (1/2, ..., 1/2)) otherwise.
std::string slice_csv(std::string_view kernel, std::size_t d, std::size_t resolution);

/// 17 significant digits (round-trips every double).
std::string format_full(double v);

}  // namespace kdisc::cli
