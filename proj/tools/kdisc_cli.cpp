// kdisc: regenerate discrepancy tables, point sets and kernel slices, and run
// the property suites.
//
//   kdisc table  --kernel per-exp --mode asymptotic --format markdown
//   kdisc points --kernel per-exp --N 256 --D 2 --mode optimized --out pts.csv
//   kdisc slice  --kernel per-mq --D 4 --resolution 201
//   kdisc check
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "kdisc/cli/checks.hpp"
#include "kdisc/cli/commands.hpp"
#include "kdisc/errors.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::vector<std::size_t> parse_list(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      if (pos != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(std::size_t(v));
    } catch (const std::exception&) {
      throw kdisc::ValidationError(std::string(flag) + ": '" + item + "' is not a positive integer");
    }
  }
  if (out.empty()) throw kdisc::ValidationError(std::string(flag) + ": empty list");
  return out;
}

std::size_t single(const std::string& text, const char* flag) {
  const auto v = parse_list(text, flag);
  if (v.size() != 1) throw kdisc::ValidationError(std::string(flag) + ": expected a single value");
  return v.front();
}

void emit(const std::string& doc, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << doc;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw kdisc::ValidationError("cannot open '" + path + "' for writing");
  out << doc;
  if (!out.flush()) throw kdisc::ValidationError("failed writing '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel discrepancy tables, optimized point sets and property checks"};
  app.require_subcommand(1);

  std::string kernel = "per-exp", mode = "random", n_text, d_text, format = "csv", out_path;
  std::uint32_t seed = 0;
  std::size_t threads = 0, mc_samples = std::size_t(1) << 16, max_iters = 10000, resolution = 201;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--kernel", kernel, "Kernel id: <seed|per|tra>-<exp|mq|gauss|trunc> or spline");
    cmd->add_option("--seed", seed, "Base seed of the MT19937 streams");
    cmd->add_option("--out", out_path, "Output file (default: stdout)");
  };
  auto add_optimizer = [&](CLI::App* cmd) {
    cmd->add_option("--mode", mode, "random | optimized | asymptotic");
    cmd->add_option("--mc-samples", mc_samples, "Monte-Carlo samples for kernels without closed-form integrals");
    cmd->add_option("--max-iters", max_iters, "Optimizer iteration cap");
  };

  auto* table = app.add_subcommand("table", "Discrepancy table: one row per N, one column per D");
  add_common(table);
  add_optimizer(table);
  table->add_option("--N", n_text, "Comma list of point counts (default 16,...,512)");
  table->add_option("--D", d_text, "Comma list of dimensions (default 1,...,128)");
  table->add_option("--format", format, "csv | markdown");
  table->add_option("--threads", threads, "Worker threads (default: machine parallelism)");

  auto* points = app.add_subcommand("points", "Write a random or optimized point set as CSV");
  add_common(points);
  add_optimizer(points);
  points->add_option("--N", n_text, "Number of points")->required();
  points->add_option("--D", d_text, "Dimension")->required();

  auto* slice = app.add_subcommand("slice", "Sample the 1-D kernel profile on [0,1]");
  add_common(slice);
  slice->add_option("--D", d_text, "Dimension")->required();
  slice->add_option("--resolution", resolution, "Number of samples (>= 2)");

  auto* check = app.add_subcommand("check", "Run the property suites");
  check->add_option("--seed", seed, "Base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    using namespace kdisc::cli;
    RunSettings settings;
    settings.mc_samples = mc_samples;
    settings.optimizer.max_iterations = max_iters;

    if (table->parsed()) {
      TableSpec spec;
      spec.kernel = kernel;
      spec.mode = parse_mode(mode);
      if (!n_text.empty()) spec.n_list = parse_list(n_text, "--N");
      if (!d_text.empty()) spec.d_list = parse_list(d_text, "--D");
      spec.seed = seed;
      spec.format = parse_format(format);
      spec.settings = settings;
      spec.threads = threads;
      emit(render_table(compute_table(spec)), out_path);
    } else if (points->parsed()) {
      emit(points_csv(kernel, single(n_text, "--N"), single(d_text, "--D"), parse_mode(mode), seed, settings),
           out_path);
    } else if (slice->parsed()) {
      emit(slice_csv(kernel, single(d_text, "--D"), resolution), out_path);
    } else if (check->parsed()) {
      bool ok = true;
      for (const auto& r : run_checks(CheckOptions{seed})) {
        std::cout << format_check(r) << '\n';
        ok = ok && r.passed;
      }
      return ok ? 0 : kExitNumerical;
    }
  } catch (const kdisc::ValidationError& e) {
    std::cerr << "kdisc: " << e.what() << '\n';
    return kExitValidation;
  } catch (const kdisc::NumericalError& e) {
    std::cerr << "kdisc: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "kdisc: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
