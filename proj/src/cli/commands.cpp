#include "kdisc/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include "kdisc/errors.hpp"
#include "kdisc/sampling.hpp"

namespace kdisc::cli {

namespace {

std::string format_fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

OptimizerConfig cond1_config(const OptimizerConfig& base) {
  OptimizerConfig c = base;
  c.max_iterations = std::min<std::size_t>(base.max_iterations, 2000);
  c.step_size = 0.0;
  return c;
}

/// COND1 needs N nonzero indices with positive coefficients.
bool has_cond1_targets(const CoefficientProfile& profile, std::size_t n) {
  return enumerate_at_most(profile, n + 1).size() == n + 1;
}

}  // namespace

Mode parse_mode(std::string_view s) {
  if (s == "random") return Mode::Random;
  if (s == "optimized") return Mode::Optimized;
  if (s == "asymptotic") return Mode::Asymptotic;
  throw ValidationError("unknown mode '" + std::string(s) + "' (expected random, optimized or asymptotic)");
}

Format parse_format(std::string_view s) {
  if (s == "csv") return Format::Csv;
  if (s == "markdown" || s == "md") return Format::Markdown;
  throw ValidationError("unknown format '" + std::string(s) + "' (expected csv or markdown)");
}

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::Random:
      return "random";
    case Mode::Optimized:
      return "optimized";
    case Mode::Asymptotic:
      return "asymptotic";
  }
  return "?";
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void TableSpec::validate() const {
  if (n_list.empty() || d_list.empty()) throw ValidationError("table: N and D lists must be nonempty");
  for (auto n : n_list)
    if (n == 0) throw ValidationError("table: N entries must be >= 1");
  for (auto d : d_list)
    if (d == 0) throw ValidationError("table: D entries must be >= 1");
  const auto probe = KernelSpec::parse(kernel, d_list.front());
  if (mode == Mode::Asymptotic && !probe.is_periodic())
    throw ValidationError("table: asymptotic mode needs a periodic kernel, got '" + kernel + "'");
  settings.optimizer.validate();
  if (settings.mc_samples < 2) throw ValidationError("table: --mc-samples must be >= 2");
}

DiscrepancyReport evaluate_points(const KernelSpec& spec, const PointSet& y, std::uint32_t seed,
                                  const RunSettings& settings) {
  if (spec.is_periodic()) return periodic_error(spec, y);
  if (kernel_double_mean(spec)) return physical_error(spec, y);
  return physical_error(spec, y, MonteCarloIntegrals{settings.mc_samples, seed + 1});
}

OptimizedPoints optimize_points(const KernelSpec& spec, std::size_t n, std::uint32_t seed,
                                const RunSettings& settings) {
  const std::size_t D = spec.dim();
  OptimizerConfig cfg = settings.optimizer;
  cfg.seed = seed;
  const PointSet y0 = uniform_points(RngSpec{seed}, n, D);
  const PhysicalObjective objective(spec, n, cfg.mc_samples, cfg.seed);

  auto first = descend_physical(spec, y0, cfg);
  OptimizedPoints best{first.points, {}, first.iterations, -1.0, "descent"};
  double best_value = objective.value(best.points);

  if (n >= 2 && spec.is_periodic() && has_cond1_targets(spec.profile(), n)) {
    const auto problem = Cond1Problem::from_profile(spec.profile(), n);
    auto c = solve_cond1(problem, first.points, cond1_config(cfg));
    best.cond1_residual = c.residual;
    best.iterations += c.iterations;
    const double v = objective.value(c.points);
    if (v < best_value) {
      best_value = v;
      best.points = std::move(c.points);
      best.stage = "cond1";
    }
  }

  const auto per_gauss = KernelSpec::periodic(Family::Gaussian, D);
  if (n >= 2 && spec.kind() == KernelSpec::Kind::Transported && spec.family() == Family::Gaussian &&
      has_cond1_targets(per_gauss.profile(), n)) {
    // Start from the annihilating configuration of the periodic Gaussian.
    const auto& per = per_gauss;
    auto c = solve_cond1(Cond1Problem::from_profile(per.profile(), n), y0, cond1_config(cfg));
    auto second = descend_physical(spec, c.points, cfg);
    best.iterations += c.iterations + second.iterations;
    best.cond1_residual = c.residual;
    const double v = objective.value(second.points);
    if (v < best_value) {
      best_value = v;
      best.points = std::move(second.points);
      best.stage = "cond1+descent";
    }
  }

  best.report = evaluate_points(spec, best.points, seed, settings);
  return best;
}

Cell compute_cell(const KernelSpec& spec, Mode mode, std::size_t n, std::uint32_t seed,
                  const RunSettings& settings) {
  Cell cell{n, spec.dim(), seed, 0.0, {}};
  switch (mode) {
    case Mode::Asymptotic:
      cell.value = asymptotic_error(spec, n).value;
      break;
    case Mode::Random:
      cell.value = evaluate_points(spec, uniform_points(RngSpec{seed}, n, spec.dim()), seed, settings).value;
      break;
    case Mode::Optimized:
      try {
        cell.value = optimize_points(spec, n, seed, settings).report.value;
      } catch (const NumericalError& e) {
        cell.value = evaluate_points(spec, uniform_points(RngSpec{seed}, n, spec.dim()), seed, settings).value;
        cell.flag = std::string("numerical failure, random start kept: ") + e.what();
      }
      break;
  }
  return cell;
}

Table compute_table(const TableSpec& spec) {
  spec.validate();
  struct Job {
    std::size_t n, d;
  };
  std::vector<Job> jobs;
  for (auto n : spec.n_list)
    for (auto d : spec.d_list) jobs.push_back({n, d});

  std::vector<Cell> cells(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      try {
        const auto kernel = KernelSpec::parse(spec.kernel, jobs[j].d);
        cells[j] = compute_cell(kernel, spec.mode, jobs[j].n, cell_seed(spec.seed, jobs[j].n, jobs[j].d),
                                spec.settings);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  std::size_t workers = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return Table{spec, std::move(cells)};
}

std::string render_table(const Table& table) {
  const auto& s = table.spec;
  const std::size_t nd = s.d_list.size();
  std::ostringstream out;
  if (s.format == Format::Csv) {
    out << "# kernel=" << s.kernel << " mode=" << mode_name(s.mode) << " base_seed=" << s.seed << "\n";
    out << "# cell seed = base_seed + 1000003*D + N\n";
    out << "N";
    for (auto d : s.d_list) out << ",D" << d;
    for (auto d : s.d_list) out << ",D" << d << "_full";
    out << ",flags\n";
    for (std::size_t i = 0; i < s.n_list.size(); ++i) {
      out << s.n_list[i];
      for (std::size_t j = 0; j < nd; ++j) out << ',' << format_fixed3(table.cells[i * nd + j].value);
      for (std::size_t j = 0; j < nd; ++j) out << ',' << format_full(table.cells[i * nd + j].value);
      std::string flags;
      for (std::size_t j = 0; j < nd; ++j) {
        const auto& c = table.cells[i * nd + j];
        if (c.flag.empty()) continue;
        if (!flags.empty()) flags += ';';
        flags += "D" + std::to_string(c.d) + ":" + c.flag;
      }
      // Flags are free text; keep the CSV well formed.
      std::replace(flags.begin(), flags.end(), ',', ' ');
      out << ',' << flags << '\n';
    }
    return out.str();
  }

  out << "**" << s.kernel << "**, " << mode_name(s.mode) << " (base seed " << s.seed << ")\n\n";
  out << "| N \\ D |";
  for (auto d : s.d_list) out << ' ' << d << " |";
  out << "\n|---:|";
  for (std::size_t j = 0; j < nd; ++j) out << "---:|";
  out << '\n';
  std::vector<const Cell*> flagged;
  for (std::size_t i = 0; i < s.n_list.size(); ++i) {
    out << "| " << s.n_list[i] << " |";
    for (std::size_t j = 0; j < nd; ++j) {
      const auto& c = table.cells[i * nd + j];
      out << ' ' << format_fixed3(c.value) << (c.flag.empty() ? "" : "*") << " |";
      if (!c.flag.empty()) flagged.push_back(&c);
    }
    out << '\n';
  }
  if (!flagged.empty()) {
    out << '\n';
    for (const auto* c : flagged) out << "\\* N=" << c->n << ", D=" << c->d << ": " << c->flag << '\n';
  }
  return out.str();
}

std::string points_csv(std::string_view kernel_id, std::size_t n, std::size_t d, Mode mode, std::uint32_t seed,
                       const RunSettings& settings) {
  if (n == 0) throw ValidationError("points: N must be >= 1");
  const auto kernel = KernelSpec::parse(kernel_id, d);
  std::ostringstream out;
  out << "# kernel=" << kernel.id() << "\n# mode=" << mode_name(mode) << "\n# N=" << n << " D=" << d
      << " seed=" << seed << '\n';
  PointSet y;
  switch (mode) {
    case Mode::Random: {
      y = uniform_points(RngSpec{seed}, n, d);
      out << "# E=" << format_full(evaluate_points(kernel, y, seed, settings).value) << '\n';
      break;
    }
    case Mode::Optimized: {
      auto r = optimize_points(kernel, n, seed, settings);
      y = std::move(r.points);
      out << "# E=" << format_full(r.report.value) << '\n';
      if (r.report.standard_error) out << "# E_standard_error=" << format_full(*r.report.standard_error) << '\n';
      out << "# iterations=" << r.iterations << "\n# stage=" << r.stage << '\n';
      if (r.cond1_residual >= 0.0) out << "# cond1_residual=" << format_full(r.cond1_residual) << '\n';
      break;
    }
    case Mode::Asymptotic:
      throw ValidationError("points: mode must be random or optimized");
  }
  for (std::size_t k = 0; k < d; ++k) out << (k ? "," : "") << 'x' << k;
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) out << (k ? "," : "") << format_full(y(i, k));
    out << '\n';
  }
  return out.str();
}

PointSet read_points_csv(std::string_view text) {
  std::vector<double> coords;
  std::size_t dim = 0, rows = 0;
  bool header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      header = true;
      dim = std::size_t(std::count(line.begin(), line.end(), ',')) + 1;
      continue;
    }
    std::size_t fields = 0;
    while (true) {
      const auto comma = line.find(',');
      const auto field = line.substr(0, comma);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ValidationError("points csv: bad number on line " + std::to_string(line_no));
      coords.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (fields != dim) throw ValidationError("points csv: wrong field count on line " + std::to_string(line_no));
    ++rows;
  }
  if (!header || rows == 0) throw ValidationError("points csv: no data rows");
  return PointSet(rows, dim, std::move(coords));
}

std::string slice_csv(std::string_view kernel_id, std::size_t d, std::size_t resolution) {
  if (resolution < 2) throw ValidationError("slice: resolution must be >= 2");
  const auto kernel = KernelSpec::parse(kernel_id, d);
  std::ostringstream out;
  out << "# kernel=" << kernel.id() << " D=" << d << '\n' << "t,value\n";
  std::vector<double> x(d, 0.5), c(d, 0.5);
  for (std::size_t i = 0; i < resolution; ++i) {
    const double t = double(i) / double(resolution - 1);
    double v;
    if (kernel.is_periodic()) {
      v = kernel.factor().value(t);
    } else {
      x[0] = t;
      v = eval(kernel, x, c);
    }
    out << format_full(t) << ',' << format_full(v) << '\n';
  }
  return out.str();
}

}  // namespace kdisc::cli
