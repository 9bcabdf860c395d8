#pragma once

// Experiment registry, error measures, convergence orders, configuration
// and report emission for the benchmark problems.

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdemoments/covariance.hpp"
#include "spdemoments/monte_carlo.hpp"
#include "spdemoments/spatial.hpp"

namespace spdemoments {

struct ExampleConstants {
  double epsilon = 0.02;
  double beta = 0.1;
  double sigma = 0.5;   // single noise
  double sigma1 = 0.5;  // two-noise examples
  double sigma2 = 0.2;
};

/// "single":         du = [(eps + s^2/2) u'' + beta sin x u'] dt + s u' dw
/// "commutative":    noises s1 cos x u' and s2 u
/// "noncommutative": noises s1 u' and s2 cos x u
/// All with u0 = cos x. Throws ConfigError for other names.
SpdeProblem build_example(const std::string& name, const ExampleConstants& constants);

/// Trig-polynomial coefficients {"const": c, "cos": [..], "sin": [..]}
/// (or a bare number) for a, b, c, u0 and each noise's sigma / nu.
SpdeProblem build_custom_example(const nlohmann::json& spec);

struct FieldNorms {
  double l2 = 0.0;    // ((2 pi / M) sum v^2)^(1/2)
  double linf = 0.0;  // max |v|
};

FieldNorms field_norms(const Eigen::VectorXd& field);

struct ErrorMeasures {
  double rho2_abs = 0.0;
  double rho2_rel = 0.0;  // NaN when the reference norm is zero
  double rhoinf_abs = 0.0;
  double rhoinf_rel = 0.0;

  bool relative_defined() const;
};

/// Differences of norms, not norms of differences.
ErrorMeasures error_measures(const FieldNorms& ref, const FieldNorms& num);
/// Both fields must live on the same grid.
ErrorMeasures error_measures(const Eigen::VectorXd& ref, const Eigen::VectorXd& num);

struct ReportRow {
  double delta = 0.0;
  double dt = 0.0;
  std::string trunc_label;
  ErrorMeasures errors;
  std::optional<double> order_l2;
  std::optional<double> order_linf;
  double wall_seconds = 0.0;

  FieldNorms norms;
  std::string reference_label;
  CovarianceHealth health;
  std::vector<std::string> warnings;
  std::string failure;  // non-empty when the solver aborted this row
};

/// log(e_i / e_{i+1}) / log(Delta_i / Delta_{i+1}) between consecutive rows
/// sharing a trunc_label; stored on the later row. Nonpositive errors or
/// failed rows leave the order unset.
void convergence_orders(std::vector<ReportRow>& rows);

/// Two-point order; nullopt when undefined.
std::optional<double> fitted_order(double e_coarse, double e_fine, double d_coarse, double d_fine);

struct ReferenceSpec {
  enum class Mode { fine, self, file };
  Mode mode = Mode::fine;
  std::optional<double> delta;
  std::optional<double> dt;
  std::optional<int> order;          // N for the fine WCE reference
  std::optional<std::size_t> modes;  // n
  std::optional<std::size_t> points; // M
  double time_budget_seconds = 1800.0;
  std::string path;
};

struct ExperimentConfig {
  std::string name = "run";
  std::string example = "single";
  std::string method = "wce";
  double T = 1.0;
  std::vector<double> deltas;
  double dt_ratio = 0.1;
  std::vector<double> dts;  // overrides dt_ratio when non-empty
  std::size_t M = 20;
  std::size_t n = 1;
  std::optional<std::size_t> q;
  std::vector<int> N;
  std::vector<std::size_t> L;
  ExampleConstants constants;
  nlohmann::json custom;
  ReferenceSpec reference;
  std::uint64_t seed = 0;
  std::size_t paths = 10000;
  std::string output;  // directory; empty = no files
  bool timings = true; // false writes wall_seconds = 0 for byte-stable CSVs
  bool parallel = false;
  bool level_hint = false;

  double dt_for(std::size_t row) const;
};

/// Parses and validates; unknown keys are rejected with ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& config);
nlohmann::json to_json(const ExperimentConfig& config);

SpdeProblem problem_for(const ExperimentConfig& config);

/// Reference second-moment field at T together with its provenance.
struct ReferenceField {
  Eigen::VectorXd field;
  FieldNorms norms;
  std::string label;
  CovarianceHealth health;
};

/// Field sample file: header "x,second_moment", one row per grid point.
ReferenceField read_reference_file(const std::string& path);
void write_reference_file(const ReferenceField& ref, std::ostream& out);

/// Fine WCE reference per the config's reference spec (mode fine).
ReferenceField compute_fine_reference(const ExperimentConfig& config);

struct MethodResult {
  Eigen::VectorXd field;
  CovarianceHealth health;
  std::vector<std::string> warnings;
};

/// One method solve to T. trunc is N (wce), L (scm) or ignored (mc).
MethodResult solve_method(const ExperimentConfig& config, const std::string& method, int trunc, double delta,
                          double dt, std::size_t M, std::size_t n);

struct ConvergenceReport {
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  std::vector<ReferenceField> references;
  std::vector<std::string> notes;
};

/// Runs every (truncation, Delta) row. A precomputed fine reference may be
/// supplied to skip recomputation. Solver errors in a row are recorded on
/// the row; a failed reference throws SolverError.
ConvergenceReport run(const ExperimentConfig& config, const ReferenceField* fine_reference = nullptr);

void write_csv(const ConvergenceReport& report, std::ostream& out);
nlohmann::json report_json(const ConvergenceReport& report);
void print_table(const ConvergenceReport& report, std::ostream& out);
/// CSV + JSON (+ reference field CSV) into config.output when set.
void write_artifacts(const ConvergenceReport& report);

/// Preset configs table1..table5; table5 yields one config per method.
std::vector<ExperimentConfig> preset(int table);

struct McCheck {
  McEstimate estimate;
  ReferenceField reference;
  double deviation_in_std_errors = 0.0;
  bool within(double k) const { return deviation_in_std_errors <= k; }
};

/// MC estimate of ||E u^2(T)||_l2 compared with the reference.
McCheck mc_check(const ExperimentConfig& config, double mc_dt, const ReferenceField* fine_reference = nullptr);

}  // namespace spdemoments
