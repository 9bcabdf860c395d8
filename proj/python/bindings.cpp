#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>
#include <vector>

#include "spdemoments/error.hpp"
#include "spdemoments/harness.hpp"
#include "spdemoments/monte_carlo.hpp"
#include "spdemoments/scm.hpp"
#include "spdemoments/sparse_grid.hpp"
#include "spdemoments/wce.hpp"

namespace py = pybind11;
namespace sm = spdemoments;

namespace {

sm::DiscreteProblem discretize(const std::string& example, std::size_t points) {
  return sm::DiscreteProblem(sm::build_example(example, {}), sm::FourierGrid(points));
}

std::size_t elements(double T, double delta) {
  const double k = T / delta;
  const auto n = static_cast<std::size_t>(std::llround(k));
  if (n == 0 || std::abs(k - static_cast<double>(n)) > 1e-9 * k) throw sm::ConfigError("T must be a multiple of delta");
  return n;
}

py::dict moments_dict(const sm::DiscreteProblem& p, const sm::MomentRun& run) {
  std::vector<double> times;
  for (const auto& s : run.moments.snapshots) times.push_back(s.time);
  py::dict out;
  out["x"] = Eigen::VectorXd(p.grid().points());
  out["field"] = Eigen::VectorXd(run.moments.final_snapshot().field);
  out["times"] = times;
  out["covariance"] = Eigen::MatrixXd(run.moments.final_covariance.entries);
  out["max_asymmetry"] = run.moments.health.max_asymmetry;
  out["worst_eigen_ratio"] = run.moments.health.worst_eigen_ratio;
  out["warnings"] = run.warnings;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Second moments of linear SPDEs by recursive Wiener chaos and stochastic collocation.";

  py::register_exception<sm::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<sm::SolverError>(m, "SolverError", PyExc_RuntimeError);

  m.def("gauss_hermite", [](std::size_t n) {
    const auto r = sm::gauss_hermite(n);
    return py::make_tuple(r.nodes, r.weights);
  }, py::arg("n"), "Nodes and weights of the n-point rule for the standard normal.");

  m.def("smolyak", [](std::size_t level, std::size_t dim) {
    const auto r = sm::smolyak(level, dim);
    Eigen::MatrixXd pts(r.size(), dim);
    for (std::size_t k = 0; k < r.size(); ++k)
      for (std::size_t a = 0; a < dim; ++a) pts(k, a) = r.point(k)[a];
    return py::make_tuple(pts, std::vector<double>(r.weights().begin(), r.weights().end()));
  }, py::arg("level"), py::arg("dim"), "Sparse-grid points (rows) and signed weights.");

  m.def("wce_second_moments",
        [](const std::string& example, int order, std::size_t modes, double delta, double dt, double T,
           std::size_t points) {
          const auto p = discretize(example, points);
          sm::WceOptions options;
          options.recursion.record_every = 0;
          return moments_dict(p, sm::wce_second_moments(p, {order, modes, delta, dt, elements(T, delta)}, options));
        },
        py::arg("example"), py::arg("N"), py::arg("n") = 1, py::arg("delta") = 0.1, py::arg("dt") = 0.01,
        py::arg("T") = 1.0, py::arg("M") = 20);

  m.def("scm_second_moments",
        [](const std::string& example, std::size_t level, std::size_t modes, double delta, double dt, double T,
           std::size_t points) {
          const auto p = discretize(example, points);
          sm::ScmOptions options;
          options.recursion.record_every = 0;
          return moments_dict(p, sm::scm_second_moments(p, {level, modes, delta, dt, elements(T, delta)}, options));
        },
        py::arg("example"), py::arg("L"), py::arg("n") = 1, py::arg("delta") = 0.1, py::arg("dt") = 0.01,
        py::arg("T") = 1.0, py::arg("M") = 20);

  m.def("mc_second_moments",
        [](const std::string& example, std::size_t paths, double T, double dt, std::size_t points,
           std::uint64_t seed) {
          const auto p = discretize(example, points);
          py::gil_scoped_release release;
          const auto est = sm::mc_second_moments(p, paths, T, dt, seed);
          py::gil_scoped_acquire acquire;
          py::dict out;
          out["field"] = est.field;
          out["std_error"] = est.std_error;
          out["l2_norm"] = est.l2_norm;
          out["l2_std_error"] = est.l2_std_error;
          out["paths"] = est.paths;
          return out;
        },
        py::arg("example"), py::arg("paths"), py::arg("T"), py::arg("dt"), py::arg("M") = 20, py::arg("seed") = 0);

  m.def("error_measures", [](const Eigen::VectorXd& ref, const Eigen::VectorXd& num) {
    const auto e = sm::error_measures(ref, num);
    py::dict out;
    out["rho2_abs"] = e.rho2_abs;
    out["rho2_rel"] = e.rho2_rel;
    out["rhoinf_abs"] = e.rhoinf_abs;
    out["rhoinf_rel"] = e.rhoinf_rel;
    return out;
  }, py::arg("ref"), py::arg("num"));

  m.def("run_config", [](const std::string& config_json) {
    const auto config = sm::parse_config(nlohmann::json::parse(config_json));
    return sm::report_json(sm::run(config)).dump();
  }, py::arg("config_json"), "Runs a JSON experiment config and returns the JSON report.");
}
