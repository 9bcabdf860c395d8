// spdemoments: convergence tables, sparse-grid dumps and Monte Carlo checks.
//
// Exit codes: 0 success, 2 configuration error, 3 solver error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "spdemoments/error.hpp"
#include "spdemoments/harness.hpp"
#include "spdemoments/sparse_grid.hpp"

namespace sm = spdemoments;

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool parallel = false;
};

void apply(const Common& common, sm::ExperimentConfig& c) {
  if (!common.out.empty()) c.output = common.out;
  if (common.seed) c.seed = *common.seed;
  if (common.parallel) c.parallel = true;
}

int report_and_status(const sm::ConvergenceReport& report) {
  sm::print_table(report, std::cout);
  sm::write_artifacts(report);
  for (const auto& row : report.rows)
    if (!row.failure.empty()) return kSolverError;
  return 0;
}

int run_config(const Common& common) {
  if (common.config.empty()) throw sm::ConfigError("run needs --config PATH");
  sm::ExperimentConfig c = sm::load_config(common.config);
  apply(common, c);
  return report_and_status(sm::run(c));
}

int run_table(int table, const Common& common) {
  int status = 0;
  for (auto c : sm::preset(table)) {
    apply(common, c);
    const int s = report_and_status(sm::run(c));
    if (s != 0) status = s;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second moments of linear SPDEs by recursive Wiener chaos and stochastic collocation"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Output directory for CSV/JSON reports");
    sub->add_option("--seed", common.seed, "RNG seed (mc only)");
    sub->add_flag("--parallel", common.parallel, "Run Delta-grid rows concurrently");
  };

  auto* run_cmd = app.add_subcommand("run", "Run a JSON experiment config");
  run_cmd->add_option("--config", common.config, "Config JSON")->required();
  add_common(run_cmd);

  CLI::App* tables[5];
  for (int t = 1; t <= 5; ++t) {
    tables[t - 1] = app.add_subcommand("table" + std::to_string(t), "Preset convergence table " + std::to_string(t));
    add_common(tables[t - 1]);
  }

  std::size_t level = 2, dim = 1;
  std::string grid_out;
  auto* grid_cmd = app.add_subcommand("dump-grid", "Write a Smolyak Gauss-Hermite rule as CSV");
  grid_cmd->add_option("--level", level, "Sparse-grid level L")->required();
  grid_cmd->add_option("--dim", dim, "Dimension d = n q")->required();
  grid_cmd->add_option("--out", grid_out, "CSV file (default stdout)");

  std::size_t mc_paths = 10000;
  double mc_dt = 1e-3;
  auto* mc_cmd = app.add_subcommand("mc-check", "Monte Carlo cross-check of |E u^2|_l2 against a reference");
  mc_cmd->add_option("--config", common.config, "Config JSON (default: single-noise example, T = 5)");
  mc_cmd->add_option("--paths", mc_paths, "Sample paths");
  mc_cmd->add_option("--dt", mc_dt, "Time step");
  add_common(mc_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run_cmd) return run_config(common);
    for (int t = 1; t <= 5; ++t)
      if (*tables[t - 1]) return run_table(t, common);
    if (*grid_cmd) {
      const sm::SparseGridRule rule = sm::smolyak(level, dim);
      if (grid_out.empty()) {
        sm::write_csv(rule, std::cout);
      } else {
        std::ofstream out(grid_out);
        if (!out) throw sm::ConfigError("cannot write '" + grid_out + "'");
        sm::write_csv(rule, out);
      }
      return 0;
    }
    if (*mc_cmd) {
      sm::ExperimentConfig c = common.config.empty() ? sm::preset(1).front() : sm::load_config(common.config);
      apply(common, c);
      c.paths = mc_paths;
      const sm::McCheck check = sm::mc_check(c, mc_dt);
      std::cout << "reference " << check.reference.label << ": |E u^2|_l2 = " << check.reference.norms.l2 << '\n'
                << "monte carlo (" << check.estimate.paths << " paths, dt = " << mc_dt
                << ", seed = " << check.estimate.seed << "): |E u^2|_l2 = " << check.estimate.l2_norm << " +- "
                << check.estimate.l2_std_error << " (1 std error), |E u^2|_linf = " << check.estimate.linf_norm
                << '\n'
                << "deviation = " << check.deviation_in_std_errors << " std errors\n";
      return check.within(3.0) ? 0 : kSolverError;
    }
  } catch (const sm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const sm::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverError;
  }
  return 0;
}
