#include "spdemoments/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "spdemoments/crank_nicolson.hpp"
#include "spdemoments/error.hpp"
#include "spdemoments/scm.hpp"
#include "spdemoments/wce.hpp"

namespace spdemoments {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Coefficient constant(double v) {
  return [v](double) { return v; };
}

Coefficient trig_polynomial(const json& spec, const std::string& what) {
  if (spec.is_number()) return constant(spec.get<double>());
  if (!spec.is_object()) throw ConfigError(what + ": expected a number or {const, cos, sin}");
  double c0 = 0.0;
  std::vector<double> cs, ss;
  for (const auto& [key, value] : spec.items()) {
    if (key == "const")
      c0 = value.get<double>();
    else if (key == "cos")
      cs = value.get<std::vector<double>>();
    else if (key == "sin")
      ss = value.get<std::vector<double>>();
    else
      throw ConfigError(what + ": unknown key '" + key + "'");
  }
  return [c0, cs, ss](double x) {
    double v = c0;
    for (std::size_t j = 0; j < cs.size(); ++j) v += cs[j] * std::cos(static_cast<double>(j + 1) * x);
    for (std::size_t j = 0; j < ss.size(); ++j) v += ss[j] * std::sin(static_cast<double>(j + 1) * x);
    return v;
  };
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T read(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

std::size_t element_count(double T, double delta) {
  const double ratio = T / delta;
  const double k = std::round(ratio);
  if (k < 1.0 || std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("T = " + fmt("%g", T) + " is not an integer multiple of Delta = " + fmt("%g", delta));
  return static_cast<std::size_t>(k);
}

std::string trunc_label(const std::string& method, int trunc, std::size_t paths) {
  if (method == "wce") return "N=" + std::to_string(trunc);
  if (method == "scm") return "L=" + std::to_string(trunc);
  return "paths=" + std::to_string(paths);
}

std::string mode_name(ReferenceSpec::Mode m) {
  switch (m) {
    case ReferenceSpec::Mode::fine: return "fine";
    case ReferenceSpec::Mode::self: return "self";
    case ReferenceSpec::Mode::file: return "file";
  }
  return "fine";
}

}  // namespace

SpdeProblem build_example(const std::string& name, const ExampleConstants& k) {
  SpdeProblem p;
  p.name = name;
  p.u0 = [](double x) { return std::cos(x); };
  p.c = constant(0.0);
  const double eps = k.epsilon, beta = k.beta;
  if (name == "single") {
    const double s = k.sigma;
    p.a = constant(eps + 0.5 * s * s);
    p.b = [beta](double x) { return beta * std::sin(x); };
    p.noises = {{constant(s), constant(0.0)}};
  } else if (name == "commutative") {
    const double s1 = k.sigma1, s2 = k.sigma2;
    p.a = [eps, s1](double x) { return eps + 0.5 * s1 * s1 * std::cos(x) * std::cos(x); };
    p.b = [beta, s1](double x) { return beta * std::sin(x) - 0.25 * s1 * s1 * std::sin(2.0 * x); };
    p.noises = {{[s1](double x) { return s1 * std::cos(x); }, constant(0.0)}, {constant(0.0), constant(s2)}};
  } else if (name == "noncommutative") {
    const double s1 = k.sigma1, s2 = k.sigma2;
    p.a = constant(eps + 0.5 * s1 * s1);
    p.b = [beta](double x) { return beta * std::sin(x); };
    p.c = [s2](double x) { return 0.5 * s2 * s2 * std::cos(x) * std::cos(x); };
    p.noises = {{constant(s1), constant(0.0)}, {constant(0.0), [s2](double x) { return s2 * std::cos(x); }}};
  } else {
    throw ConfigError("unknown example '" + name + "' (expected single, commutative, noncommutative or custom)");
  }
  return p;
}

SpdeProblem build_custom_example(const json& spec) {
  reject_unknown(spec, {"a", "b", "c", "noises", "u0"}, "custom");
  SpdeProblem p;
  p.name = "custom";
  if (!spec.contains("a") || !spec.contains("noises")) throw ConfigError("custom: 'a' and 'noises' are required");
  p.a = trig_polynomial(spec.at("a"), "custom.a");
  p.b = trig_polynomial(spec.value("b", json(0.0)), "custom.b");
  p.c = trig_polynomial(spec.value("c", json(0.0)), "custom.c");
  p.u0 = spec.contains("u0") ? trig_polynomial(spec.at("u0"), "custom.u0") : Coefficient([](double x) {
    return std::cos(x);
  });
  const json& noises = spec.at("noises");
  if (!noises.is_array() || noises.empty()) throw ConfigError("custom.noises: expected a non-empty array");
  for (const auto& nz : noises) {
    reject_unknown(nz, {"sigma", "nu"}, "custom.noises[]");
    p.noises.push_back({trig_polynomial(nz.value("sigma", json(0.0)), "custom.noises[].sigma"),
                        trig_polynomial(nz.value("nu", json(0.0)), "custom.noises[].nu")});
  }
  return p;
}

FieldNorms field_norms(const Eigen::VectorXd& field) {
  if (field.size() == 0) throw ConfigError("field_norms: empty field");
  const double h = 2.0 * std::numbers::pi / static_cast<double>(field.size());
  return {std::sqrt(h * field.squaredNorm()), field.cwiseAbs().maxCoeff()};
}

bool ErrorMeasures::relative_defined() const { return !std::isnan(rho2_rel) && !std::isnan(rhoinf_rel); }

ErrorMeasures error_measures(const FieldNorms& ref, const FieldNorms& num) {
  ErrorMeasures e;
  e.rho2_abs = std::abs(ref.l2 - num.l2);
  e.rhoinf_abs = std::abs(ref.linf - num.linf);
  e.rho2_rel = ref.l2 > 0.0 ? e.rho2_abs / ref.l2 : kNaN;
  e.rhoinf_rel = ref.linf > 0.0 ? e.rhoinf_abs / ref.linf : kNaN;
  return e;
}

ErrorMeasures error_measures(const Eigen::VectorXd& ref, const Eigen::VectorXd& num) {
  if (ref.size() != num.size()) throw ConfigError("error_measures: fields live on different grids");
  return error_measures(field_norms(ref), field_norms(num));
}

std::optional<double> fitted_order(double e_coarse, double e_fine, double d_coarse, double d_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0) || !(d_coarse > 0.0) || !(d_fine > 0.0) || d_coarse == d_fine)
    return std::nullopt;
  return std::log(e_coarse / e_fine) / std::log(d_coarse / d_fine);
}

void convergence_orders(std::vector<ReportRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].order_l2.reset();
    rows[i].order_linf.reset();
    if (!rows[i].failure.empty()) continue;
    // nearest earlier row in the same series
    for (std::size_t j = i; j-- > 0;) {
      if (rows[j].trunc_label != rows[i].trunc_label) continue;
      if (!rows[j].failure.empty()) break;
      rows[i].order_l2 = fitted_order(rows[j].errors.rho2_rel, rows[i].errors.rho2_rel, rows[j].delta, rows[i].delta);
      rows[i].order_linf =
          fitted_order(rows[j].errors.rhoinf_rel, rows[i].errors.rhoinf_rel, rows[j].delta, rows[i].delta);
      break;
    }
  }
}

double ExperimentConfig::dt_for(std::size_t row) const {
  if (!dts.empty()) return dts.at(row);
  return deltas.at(row) * dt_ratio;
}

ExperimentConfig parse_config(const json& doc) {
  reject_unknown(doc,
                 {"name", "example", "method", "T", "deltas", "dt_ratio", "dts", "M", "n", "q", "N", "L",
                  "constants", "custom", "reference", "seed", "paths", "output", "timings", "parallel", "level_hint"},
                 "config");
  ExperimentConfig c;
  const std::string w = "config";
  if (doc.contains("name")) c.name = read<std::string>(doc, "name", w);
  if (doc.contains("example")) c.example = read<std::string>(doc, "example", w);
  if (doc.contains("method")) c.method = read<std::string>(doc, "method", w);
  if (doc.contains("T")) c.T = read<double>(doc, "T", w);
  if (doc.contains("deltas")) c.deltas = read<std::vector<double>>(doc, "deltas", w);
  if (doc.contains("dt_ratio")) c.dt_ratio = read<double>(doc, "dt_ratio", w);
  if (doc.contains("dts")) c.dts = read<std::vector<double>>(doc, "dts", w);
  if (doc.contains("dt_ratio") && doc.contains("dts")) throw ConfigError("config: give dt_ratio or dts, not both");
  if (doc.contains("M")) c.M = read<std::size_t>(doc, "M", w);
  if (doc.contains("n")) c.n = read<std::size_t>(doc, "n", w);
  if (doc.contains("q")) c.q = read<std::size_t>(doc, "q", w);
  if (doc.contains("N")) c.N = read<std::vector<int>>(doc, "N", w);
  if (doc.contains("L")) c.L = read<std::vector<std::size_t>>(doc, "L", w);
  if (doc.contains("constants")) {
    const json& k = doc.at("constants");
    reject_unknown(k, {"epsilon", "beta", "sigma", "sigma1", "sigma2"}, "constants");
    const std::string kw = "constants";
    if (k.contains("epsilon")) c.constants.epsilon = read<double>(k, "epsilon", kw);
    if (k.contains("beta")) c.constants.beta = read<double>(k, "beta", kw);
    if (k.contains("sigma")) c.constants.sigma = read<double>(k, "sigma", kw);
    if (k.contains("sigma1")) c.constants.sigma1 = read<double>(k, "sigma1", kw);
    if (k.contains("sigma2")) c.constants.sigma2 = read<double>(k, "sigma2", kw);
  }
  if (doc.contains("custom")) c.custom = doc.at("custom");
  if (doc.contains("reference")) {
    const json& r = doc.at("reference");
    reject_unknown(r, {"mode", "delta", "dt", "N", "n", "M", "time_budget_seconds", "path"}, "reference");
    const std::string rw = "reference";
    if (r.contains("mode")) {
      const auto m = read<std::string>(r, "mode", rw);
      if (m == "fine")
        c.reference.mode = ReferenceSpec::Mode::fine;
      else if (m == "self")
        c.reference.mode = ReferenceSpec::Mode::self;
      else if (m == "file")
        c.reference.mode = ReferenceSpec::Mode::file;
      else
        throw ConfigError("reference.mode: expected fine, self or file");
    }
    if (r.contains("delta")) c.reference.delta = read<double>(r, "delta", rw);
    if (r.contains("dt")) c.reference.dt = read<double>(r, "dt", rw);
    if (r.contains("N")) c.reference.order = read<int>(r, "N", rw);
    if (r.contains("n")) c.reference.modes = read<std::size_t>(r, "n", rw);
    if (r.contains("M")) c.reference.points = read<std::size_t>(r, "M", rw);
    if (r.contains("time_budget_seconds"))
      c.reference.time_budget_seconds = read<double>(r, "time_budget_seconds", rw);
    if (r.contains("path")) c.reference.path = read<std::string>(r, "path", rw);
  }
  if (doc.contains("seed")) c.seed = read<std::uint64_t>(doc, "seed", w);
  if (doc.contains("paths")) c.paths = read<std::size_t>(doc, "paths", w);
  if (doc.contains("output")) c.output = read<std::string>(doc, "output", w);
  if (doc.contains("timings")) c.timings = read<bool>(doc, "timings", w);
  if (doc.contains("parallel")) c.parallel = read<bool>(doc, "parallel", w);
  if (doc.contains("level_hint")) c.level_hint = read<bool>(doc, "level_hint", w);
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

void validate(const ExperimentConfig& c) {
  if (c.method != "wce" && c.method != "scm" && c.method != "mc")
    throw ConfigError("method must be wce, scm or mc (got '" + c.method + "')");
  if (!(c.T > 0.0)) throw ConfigError("T must be positive");
  if (c.deltas.empty()) throw ConfigError("deltas must be non-empty");
  if (!c.dts.empty() && c.dts.size() != c.deltas.size()) throw ConfigError("dts must match deltas in length");
  if (!(c.dt_ratio > 0.0) || c.dt_ratio > 1.0) throw ConfigError("dt_ratio must lie in (0, 1]");
  for (std::size_t i = 0; i < c.deltas.size(); ++i) {
    if (!(c.deltas[i] > 0.0)) throw ConfigError("deltas must be positive");
    if (c.method == "mc") {
      step_count(c.T, c.dt_for(i));
    } else {
      element_count(c.T, c.deltas[i]);
      step_count(c.deltas[i], c.dt_for(i));
    }
  }
  if (c.M < 2 || c.M % 2 != 0 || c.M > FourierGrid::kMaxPoints)
    throw ConfigError("M must be even and between 2 and " + std::to_string(FourierGrid::kMaxPoints));
  if (c.n == 0) throw ConfigError("n must be >= 1");
  if (c.method == "wce") {
    if (c.N.empty()) throw ConfigError("method wce needs a non-empty N list");
    for (int v : c.N)
      if (v < 0) throw ConfigError("N must be >= 0");
  }
  if (c.method == "scm") {
    if (c.L.empty()) throw ConfigError("method scm needs a non-empty L list");
    for (auto v : c.L)
      if (v == 0) throw ConfigError("L must be >= 1");
  }
  if (c.method == "mc" && c.paths < 2) throw ConfigError("mc needs paths >= 2");
  if (c.example == "custom" && c.custom.is_null()) throw ConfigError("example custom needs a 'custom' block");
  if (c.example != "custom" && !c.custom.is_null()) throw ConfigError("'custom' block given for a built-in example");
  const SpdeProblem p = problem_for(c);
  if (c.q && *c.q != p.noise_count())
    throw ConfigError("q = " + std::to_string(*c.q) + " does not match the example's " +
                      std::to_string(p.noise_count()) + " noises");

  const ReferenceSpec& r = c.reference;
  if (!(r.time_budget_seconds > 0.0)) throw ConfigError("reference.time_budget_seconds must be positive");
  if (r.points && (*r.points < 2 || *r.points % 2 != 0 || *r.points > FourierGrid::kMaxPoints))
    throw ConfigError("reference.M must be even and between 2 and " + std::to_string(FourierGrid::kMaxPoints));
  if (r.mode == ReferenceSpec::Mode::file && r.path.empty()) throw ConfigError("reference mode file needs a path");
  if (r.mode == ReferenceSpec::Mode::self) {
    if (!r.delta || !r.dt) throw ConfigError("reference mode self needs delta and dt");
    if (c.method == "mc") throw ConfigError("reference mode self is not available for mc");
  }
  if (r.delta) {
    element_count(c.T, *r.delta);
    step_count(*r.delta, r.dt.value_or(*r.delta * c.dt_ratio));
  }
  if (r.order && *r.order < 0) throw ConfigError("reference.N must be >= 0");
  if (r.modes && *r.modes == 0) throw ConfigError("reference.n must be >= 1");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["example"] = c.example;
  j["method"] = c.method;
  j["T"] = c.T;
  j["deltas"] = c.deltas;
  if (c.dts.empty())
    j["dt_ratio"] = c.dt_ratio;
  else
    j["dts"] = c.dts;
  j["M"] = c.M;
  j["n"] = c.n;
  if (c.q) j["q"] = *c.q;
  if (!c.N.empty()) j["N"] = c.N;
  if (!c.L.empty()) j["L"] = c.L;
  j["constants"] = {{"epsilon", c.constants.epsilon},
                    {"beta", c.constants.beta},
                    {"sigma", c.constants.sigma},
                    {"sigma1", c.constants.sigma1},
                    {"sigma2", c.constants.sigma2}};
  if (!c.custom.is_null()) j["custom"] = c.custom;
  json r;
  r["mode"] = mode_name(c.reference.mode);
  if (c.reference.delta) r["delta"] = *c.reference.delta;
  if (c.reference.dt) r["dt"] = *c.reference.dt;
  if (c.reference.order) r["N"] = *c.reference.order;
  if (c.reference.modes) r["n"] = *c.reference.modes;
  if (c.reference.points) r["M"] = *c.reference.points;
  r["time_budget_seconds"] = c.reference.time_budget_seconds;
  if (!c.reference.path.empty()) r["path"] = c.reference.path;
  j["reference"] = r;
  if (c.method == "mc") {
    j["seed"] = c.seed;
    j["paths"] = c.paths;
  }
  if (!c.output.empty()) j["output"] = c.output;
  j["timings"] = c.timings;
  j["parallel"] = c.parallel;
  j["level_hint"] = c.level_hint;
  return j;
}

SpdeProblem problem_for(const ExperimentConfig& c) {
  if (c.example == "custom") return build_custom_example(c.custom);
  return build_example(c.example, c.constants);
}

ReferenceField read_reference_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open reference file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,second_moment", 0) != 0)
    throw ConfigError("reference file '" + path + "' must start with header x,second_moment");
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("reference file: malformed row '" + line + "'");
    try {
      values.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ConfigError("reference file: malformed row '" + line + "'");
    }
  }
  if (values.size() < 2) throw ConfigError("reference file '" + path + "' holds fewer than two points");
  ReferenceField ref;
  ref.field = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  ref.norms = field_norms(ref.field);
  ref.label = "file:" + path;
  return ref;
}

void write_reference_file(const ReferenceField& ref, std::ostream& out) {
  const auto m = ref.field.size();
  out << "x,second_moment\n";
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m);
    out << fmt("%.17g", x) << ',' << fmt("%.17g", ref.field(i)) << '\n';
  }
}

MethodResult solve_method(const ExperimentConfig& config, const std::string& method, int trunc, double delta,
                          double dt, std::size_t M, std::size_t n) {
  const SpdeProblem problem = problem_for(config);
  const DiscreteProblem dp(problem, FourierGrid(M));
  MethodResult out;
  if (method == "mc") {
    const McEstimate est = mc_second_moments(dp, config.paths, config.T, dt, config.seed);
    out.field = est.field;
    return out;
  }
  const std::size_t elements = element_count(config.T, delta);
  MomentRun run;
  if (method == "wce") {
    WceOptions opt;
    opt.recursion.record_every = 0;
    run = wce_second_moments(dp, {trunc, n, delta, dt, elements}, opt);
  } else if (method == "scm") {
    ScmOptions opt;
    opt.recursion.record_every = 0;
    run = scm_second_moments(dp, {static_cast<std::size_t>(trunc), n, delta, dt, elements}, opt);
  } else {
    throw ConfigError("unknown method '" + method + "'");
  }
  out.field = run.moments.final_snapshot().field;
  out.health = run.moments.health;
  out.warnings = std::move(run.warnings);
  return out;
}

ReferenceField compute_fine_reference(const ExperimentConfig& c) {
  const ReferenceSpec& r = c.reference;
  const double min_delta = *std::min_element(c.deltas.begin(), c.deltas.end());
  double min_dt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.deltas.size(); ++i) min_dt = std::min(min_dt, c.dt_for(i));
  int max_n = 2;
  if (c.method == "wce") max_n = *std::max_element(c.N.begin(), c.N.end());
  const int order = r.order.value_or(max_n + 2);
  const std::size_t modes = r.modes.value_or(c.n);
  const std::size_t points = r.points.value_or(c.M);
  const double delta = r.delta.value_or(min_delta / 10.0);
  const double dt = r.dt.value_or(min_dt / 10.0);
  const std::size_t elements = element_count(c.T, delta);

  const SpdeProblem problem = problem_for(c);
  const DiscreteProblem dp(problem, FourierGrid(points));
  WceOptions opt;
  opt.recursion.record_every = 0;
  opt.recursion.deadline =
      std::chrono::steady_clock::now() +
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(r.time_budget_seconds));
  MomentRun run = wce_second_moments(dp, {order, modes, delta, dt, elements}, opt);

  ReferenceField ref;
  ref.field = run.moments.final_snapshot().field;
  ref.norms = field_norms(ref.field);
  ref.health = run.moments.health;
  std::ostringstream label;
  label << "fine wce N=" << order << " n=" << modes << " Delta=" << fmt("%g", delta) << " dt=" << fmt("%g", dt)
        << " M=" << points;
  ref.label = label.str();
  return ref;
}

ConvergenceReport run(const ExperimentConfig& config, const ReferenceField* fine_reference) {
  validate(config);
  ConvergenceReport report;
  report.config = config;

  std::vector<int> truncs;
  if (config.method == "wce") truncs = config.N;
  if (config.method == "scm") truncs.assign(config.L.begin(), config.L.end());
  if (config.method == "mc") truncs = {0};

  if (config.level_hint && config.method == "scm")
    for (auto l : config.L)
      if (l >= 4) {
        report.notes.push_back("sparse-grid level L >= 4 rarely changes the observed first-order behaviour");
        break;
      }

  // references: one shared (fine / file) or one per truncation (self)
  std::vector<std::size_t> ref_index(truncs.size(), 0);
  const ReferenceSpec& r = config.reference;
  if (r.mode == ReferenceSpec::Mode::self) {
    for (std::size_t t = 0; t < truncs.size(); ++t) {
      const std::size_t points = r.points.value_or(config.M);
      MethodResult res;
      try {
        res = solve_method(config, config.method, truncs[t], *r.delta, *r.dt, points, config.n);
      } catch (const SolverError& e) {
        throw SolverError("reference (" + trunc_label(config.method, truncs[t], 0) + ") failed: " + e.what());
      }
      ReferenceField ref;
      ref.field = res.field;
      ref.norms = field_norms(res.field);
      ref.health = res.health;
      ref.label = "self " + config.method + " " + trunc_label(config.method, truncs[t], 0) +
                  " Delta=" + fmt("%g", *r.delta) + " dt=" + fmt("%g", *r.dt) + " M=" + std::to_string(points);
      ref_index[t] = report.references.size();
      report.references.push_back(std::move(ref));
    }
  } else if (r.mode == ReferenceSpec::Mode::file) {
    report.references.push_back(read_reference_file(r.path));
  } else if (fine_reference) {
    report.references.push_back(*fine_reference);
  } else {
    try {
      report.references.push_back(compute_fine_reference(config));
    } catch (const SolverError& e) {
      throw SolverError(std::string("reference failed: ") + e.what());
    }
  }

  struct Job {
    std::size_t trunc;
    std::size_t delta;
  };
  std::vector<Job> jobs;
  for (std::size_t t = 0; t < truncs.size(); ++t)
    for (std::size_t d = 0; d < config.deltas.size(); ++d) jobs.push_back({t, d});

  auto solve_row = [&](const Job& job) {
    ReportRow row;
    const double delta = config.deltas[job.delta];
    row.dt = config.dt_for(job.delta);
    row.delta = config.method == "mc" ? row.dt : delta;
    row.trunc_label = trunc_label(config.method, truncs[job.trunc], config.paths);
    const ReferenceField& ref = report.references[ref_index[job.trunc]];
    row.reference_label = ref.label;
    const auto start = std::chrono::steady_clock::now();
    try {
      MethodResult res = solve_method(config, config.method, truncs[job.trunc], delta, row.dt, config.M, config.n);
      row.norms = field_norms(res.field);
      row.errors = error_measures(ref.norms, row.norms);
      row.health = res.health;
      row.warnings = std::move(res.warnings);
    } catch (const SolverError& e) {
      row.failure = e.what();
      row.errors = {kNaN, kNaN, kNaN, kNaN};
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.wall_seconds = config.timings ? wall : 0.0;
    return row;
  };

  if (config.parallel) {
    std::vector<std::future<ReportRow>> futures;
    for (const auto& job : jobs) futures.push_back(std::async(std::launch::async, solve_row, job));
    for (auto& f : futures) report.rows.push_back(f.get());
  } else {
    for (const auto& job : jobs) report.rows.push_back(solve_row(job));
  }
  convergence_orders(report.rows);
  return report;
}

void write_csv(const ConvergenceReport& report, std::ostream& out) {
  out << "delta,dt,trunc_label,rho2_abs,rho2_rel,rhoinf_abs,rhoinf_rel,order_l2,order_linf,wall_seconds\n";
  auto opt = [](const std::optional<double>& v) { return v ? fmt("%.4f", *v) : std::string(); };
  for (const auto& row : report.rows) {
    out << fmt("%.6g", row.delta) << ',' << fmt("%.6g", row.dt) << ',' << row.trunc_label << ','
        << fmt("%.6e", row.errors.rho2_abs) << ',' << fmt("%.6e", row.errors.rho2_rel) << ','
        << fmt("%.6e", row.errors.rhoinf_abs) << ',' << fmt("%.6e", row.errors.rhoinf_rel) << ','
        << opt(row.order_l2) << ',' << opt(row.order_linf) << ',' << fmt("%.3f", row.wall_seconds) << '\n';
  }
}

json report_json(const ConvergenceReport& report) {
  json j;
  j["config"] = to_json(report.config);
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json refs = json::array();
  for (const auto& r : report.references)
    refs.push_back({{"label", r.label},
                    {"l2", r.norms.l2},
                    {"linf", r.norms.linf},
                    {"max_asymmetry", r.health.max_asymmetry},
                    {"worst_eigen_ratio", r.health.worst_eigen_ratio}});
  j["references"] = refs;
  json rows = json::array();
  for (const auto& row : report.rows) {
    json o;
    o["delta"] = row.delta;
    o["dt"] = row.dt;
    o["trunc_label"] = row.trunc_label;
    o["rho2_abs"] = num(row.errors.rho2_abs);
    o["rho2_rel"] = num(row.errors.rho2_rel);
    o["rhoinf_abs"] = num(row.errors.rhoinf_abs);
    o["rhoinf_rel"] = num(row.errors.rhoinf_rel);
    o["order_l2"] = row.order_l2 ? json(*row.order_l2) : json(nullptr);
    o["order_linf"] = row.order_linf ? json(*row.order_linf) : json(nullptr);
    o["wall_seconds"] = row.wall_seconds;
    o["l2"] = num(row.norms.l2);
    o["linf"] = num(row.norms.linf);
    o["reference"] = row.reference_label;
    o["max_asymmetry"] = row.health.max_asymmetry;
    o["worst_eigen_ratio"] = row.health.worst_eigen_ratio;
    o["symmetric"] = row.health.symmetric();
    o["psd"] = row.health.positive_semidefinite();
    o["warnings"] = row.warnings;
    if (!row.failure.empty()) o["failure"] = row.failure;
    rows.push_back(o);
  }
  j["rows"] = rows;
  j["notes"] = report.notes;
  return j;
}

void print_table(const ConvergenceReport& report, std::ostream& out) {
  out << report.config.name << ": " << report.config.example << " / " << report.config.method
      << ", T = " << fmt("%g", report.config.T) << ", M = " << report.config.M << ", n = " << report.config.n << '\n';
  for (const auto& r : report.references)
    out << "  reference " << r.label << ": |E u^2|_l2 = " << fmt("%.12f", r.norms.l2)
        << ", |E u^2|_linf = " << fmt("%.12f", r.norms.linf) << '\n';
  out << std::left << std::setw(10) << "Delta" << std::setw(10) << "dt" << std::setw(14) << "trunc"
      << std::setw(13) << "rho_r,2" << std::setw(9) << "order" << std::setw(13) << "rho_r,inf" << std::setw(9)
      << "order" << "time(s)\n";
  for (const auto& row : report.rows) {
    out << std::setw(10) << fmt("%.1e", row.delta) << std::setw(10) << fmt("%.1e", row.dt) << std::setw(14)
        << row.trunc_label;
    if (!row.failure.empty()) {
      out << "FAILED: " << row.failure << '\n';
      continue;
    }
    out << std::setw(13) << fmt("%.4e", row.errors.rho2_rel) << std::setw(9)
        << (row.order_l2 ? fmt("%.2f", *row.order_l2) : "--") << std::setw(13)
        << fmt("%.4e", row.errors.rhoinf_rel) << std::setw(9)
        << (row.order_linf ? fmt("%.2f", *row.order_linf) : "--") << fmt("%.2f", row.wall_seconds) << '\n';
    for (const auto& w : row.warnings) out << "    warning: " << w << '\n';
  }
  for (const auto& note : report.notes) out << "  note: " << note << '\n';
}

void write_artifacts(const ConvergenceReport& report) {
  if (report.config.output.empty()) return;
  namespace fs = std::filesystem;
  const fs::path dir(report.config.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const std::string stem = report.config.name;
  {
    std::ofstream out(dir / (stem + ".csv"));
    write_csv(report, out);
  }
  {
    std::ofstream out(dir / (stem + ".json"));
    json j = report_json(report);
    if (!report.config.timings)
      for (auto& row : j["rows"]) row["wall_seconds"] = 0.0;
    out << j.dump(2) << '\n';
  }
  for (std::size_t i = 0; i < report.references.size(); ++i) {
    std::ofstream out(dir / (stem + "_reference" + (report.references.size() > 1 ? std::to_string(i) : "") + ".csv"));
    write_reference_file(report.references[i], out);
  }
}

std::vector<ExperimentConfig> preset(int table) {
  ExperimentConfig c;
  c.n = 1;
  c.dt_ratio = 0.1;
  c.name = "table" + std::to_string(table);
  switch (table) {
    case 1:
    case 2:
      c.example = "single";
      c.T = 5.0;
      c.M = 20;
      c.deltas = {1e-1, 1e-2, 1e-3};
      c.reference.mode = ReferenceSpec::Mode::fine;
      c.reference.delta = 1e-4;
      // 1e-5 leaves the n = 4 temporal modes under-resolved by ~1e-8 relative
      c.reference.dt = 1e-6;
      c.reference.order = 4;
      c.reference.modes = 4;
      c.reference.points = 30;
      if (table == 1) {
        c.method = "wce";
        c.N = {1, 2};
      } else {
        c.method = "scm";
        c.L = {2, 3};
      }
      return {c};
    case 3:
    case 4:
      c.example = "commutative";
      c.T = 1.0;
      c.M = 30;
      c.deltas = {1e-1, 1e-2, 1e-3};
      c.reference.mode = ReferenceSpec::Mode::self;
      c.reference.delta = 1e-4;
      c.reference.dt = 1e-5;
      if (table == 3) {
        c.method = "wce";
        c.N = {1, 2};
      } else {
        c.method = "scm";
        c.L = {2, 3};
      }
      return {c};
    case 5: {
      c.example = "noncommutative";
      c.T = 1.0;
      c.M = 20;
      c.deltas = {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3};
      c.reference.mode = ReferenceSpec::Mode::self;
      c.reference.delta = 5e-4;
      c.reference.dt = 5e-5;
      ExperimentConfig w = c, s = c;
      w.name = "table5_wce";
      w.method = "wce";
      w.N = {1, 2};
      s.name = "table5_scm";
      s.method = "scm";
      s.L = {2, 3};
      return {w, s};
    }
    default:
      throw ConfigError("no preset table" + std::to_string(table) + " (expected 1-5)");
  }
}

McCheck mc_check(const ExperimentConfig& config, double mc_dt, const ReferenceField* fine_reference) {
  if (config.paths < 2) throw ConfigError("mc-check needs paths >= 2");
  step_count(config.T, mc_dt);
  McCheck out;
  if (config.reference.mode == ReferenceSpec::Mode::file)
    out.reference = read_reference_file(config.reference.path);
  else if (fine_reference)
    out.reference = *fine_reference;
  else
    out.reference = compute_fine_reference(config);
  const SpdeProblem problem = problem_for(config);
  const DiscreteProblem dp(problem, FourierGrid(config.M));
  out.estimate = mc_second_moments(dp, config.paths, config.T, mc_dt, config.seed);
  const double dev = std::abs(out.estimate.l2_norm - out.reference.norms.l2);
  out.deviation_in_std_errors =
      out.estimate.l2_std_error > 0.0 ? dev / out.estimate.l2_std_error : (dev == 0.0 ? 0.0 : kNaN);
  return out;
}

}  // namespace spdemoments
