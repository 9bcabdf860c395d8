#include "spdemoments/scm.hpp"

#include <sstream>
#include <string>
#include <vector>

#include "spdemoments/crank_nicolson.hpp"
#include "spdemoments/error.hpp"
#include "spdemoments/stochastic_basis.hpp"

namespace spdemoments {

Eigen::MatrixXd solve_anchored(const DiscreteProblem& problem, const Eigen::MatrixXd& init,
                               std::span<const double> node, std::size_t modes, double delta, double dt) {
  const std::size_t q = problem.noise_count();
  if (modes == 0) throw ConfigError("solve_anchored: n must be >= 1");
  if (node.size() != modes * q)
    throw ConfigError("solve_anchored: node has " + std::to_string(node.size()) + " entries, expected n*q = " +
                      std::to_string(modes * q));
  if (init.rows() != static_cast<Eigen::Index>(problem.size()))
    throw ConfigError("solve_anchored: initial data does not match the grid");

  const TemporalBasis basis(delta, modes);
  bool time_dependent = false;
  for (std::size_t k = 0; k < q; ++k)
    for (std::size_t l = 1; l < modes; ++l) time_dependent |= node[k * modes + l] != 0.0;

  LinearEvolution evo;
  evo.dimension = init.rows();
  evo.constant_drift = !time_dependent;
  evo.drift = [&](double t) -> Eigen::MatrixXd {
    Eigen::MatrixXd a = problem.stratonovich_drift();
    for (std::size_t k = 0; k < q; ++k) {
      double g = 0.0;
      for (std::size_t l = 0; l < modes; ++l) g += node[k * modes + l] * basis.value(l, t);
      if (g != 0.0) a += g * problem.noise(k);
    }
    return a;
  };
  return crank_nicolson(evo, init, delta, dt).back();
}

CovarianceMap scm_covariance_map(const DiscreteProblem& problem, const SparseGridRule& rule, std::size_t modes,
                                 double delta, double dt) {
  if (rule.dimension() != modes * problem.noise_count())
    throw ConfigError("scm: sparse grid dimension must equal n*q");
  const auto m = static_cast<Eigen::Index>(problem.size());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  CovarianceMap map(m);
  for (std::size_t kappa = 0; kappa < rule.size(); ++kappa) {
    Eigen::MatrixXd end;
    try {
      end = solve_anchored(problem, id, rule.point(kappa), modes, delta, dt);
    } catch (const SolverError& e) {
      throw SolverError("anchored solve at node kappa = " + std::to_string(kappa) + ": " + e.what());
    }
    map.add_term(rule.weight(kappa), transfer_matrix(problem.grid(), end));
  }
  return map;
}

MomentRun scm_second_moments(const DiscreteProblem& problem, const ScmParameters& params,
                             const ScmOptions& options) {
  if (params.level == 0) throw ConfigError("scm: L must be >= 1");
  if (params.modes == 0) throw ConfigError("scm: n must be >= 1");
  if (params.elements == 0) throw ConfigError("scm: need K >= 1");
  if (problem.noise_count() == 0) throw ConfigError("scm: problem has no noise terms");
  const SparseGridRule rule = smolyak(params.level, params.modes * problem.noise_count());
  const CovarianceMap map = scm_covariance_map(problem, rule, params.modes, params.delta, params.dt);
  MomentRun run;
  const Eigen::MatrixXd h0 = initial_covariance(problem.grid(), problem.initial());
  run.moments = propagate_covariance(map, problem.grid(), h0, params.delta, params.elements, options.recursion);
  if (!run.moments.health.symmetric()) run.warnings.push_back("covariance lost symmetry");
  if (!run.moments.health.positive_semidefinite()) {
    std::ostringstream msg;
    msg << "covariance PSD violation (signed sparse-grid weights): min eig / max eig = "
        << run.moments.health.worst_eigen_ratio;
    run.warnings.push_back(msg.str());
  }
  return run;
}

}  // namespace spdemoments
