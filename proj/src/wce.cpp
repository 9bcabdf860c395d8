#include "spdemoments/wce.hpp"

#include <sstream>

#include "spdemoments/crank_nicolson.hpp"
#include "spdemoments/error.hpp"

namespace spdemoments {

namespace {

std::string describe(const MultiIndex& alpha) {
  std::ostringstream s;
  s << '[';
  for (std::size_t k = 0; k < alpha.noises(); ++k) {
    if (k) s << "; ";
    for (std::size_t l = 0; l < alpha.modes(); ++l) s << (l ? "," : "") << alpha(k, l);
  }
  s << ']';
  return s.str();
}

}  // namespace

PropagatorSolution solve_propagator(const DiscreteProblem& problem, const Eigen::MatrixXd& init, int order,
                                    std::size_t modes, double delta, double dt) {
  if (init.rows() != static_cast<Eigen::Index>(problem.size()))
    throw ConfigError("solve_propagator: initial data does not match the grid");
  if (problem.noise_count() == 0) throw ConfigError("solve_propagator: problem has no noise terms");
  const std::size_t steps = step_count(delta, dt);
  const TemporalBasis basis(delta, modes);
  MultiIndexSet indices = enumerate_multiindices(order, modes, problem.noise_count());

  LinearEvolution evo;
  evo.dimension = init.rows();
  evo.constant_drift = true;
  evo.drift = [&problem](double) -> Eigen::MatrixXd { return problem.drift(); };

  // basis values at the CN endpoints, shared by every alpha
  std::vector<std::vector<double>> m_at(modes, std::vector<double>(steps + 1));
  for (std::size_t l = 0; l < modes; ++l)
    for (std::size_t j = 0; j <= steps; ++j) m_at[l][j] = basis.value(l, static_cast<double>(j) * dt);

  std::vector<std::vector<Eigen::MatrixXd>> traj(indices.size());
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(init.rows(), init.cols());

  for (std::size_t a = 0; a < indices.size(); ++a) {
    const MultiIndex& alpha = indices[a];
    try {
      if (alpha.order() == 0) {
        evo.forcing = nullptr;
        traj[a] = crank_nicolson(evo, init, delta, dt);
        continue;
      }
      struct Coupling {
        double multiplicity;
        std::size_t mode;
        std::size_t noise;
        std::size_t parent;
      };
      std::vector<Coupling> couplings;
      for (std::size_t k = 0; k < alpha.noises(); ++k)
        for (std::size_t l = 0; l < alpha.modes(); ++l)
          if (alpha(k, l) > 0)
            couplings.push_back({static_cast<double>(alpha(k, l)), l, k, indices.position(alpha.minus(k, l))});

      evo.forcing = [&](std::size_t j, double) -> Eigen::MatrixXd {
        Eigen::MatrixXd f = zero;
        for (const auto& c : couplings)
          f.noalias() += (c.multiplicity * m_at[c.mode][j]) * (problem.noise(c.noise) * traj[c.parent][j]);
        return f;
      };
      traj[a] = crank_nicolson(evo, zero, delta, dt);
    } catch (const SolverError& e) {
      throw SolverError("propagator for alpha = " + describe(alpha) + ": " + e.what());
    }
  }

  PropagatorSolution out{std::move(indices), {}};
  out.end_fields.reserve(traj.size());
  for (auto& t : traj) out.end_fields.push_back(std::move(t.back()));
  return out;
}

CovarianceMap wce_covariance_map(const DiscreteProblem& problem, int order, std::size_t modes, double delta,
                                 double dt) {
  const auto m = static_cast<Eigen::Index>(problem.size());
  const PropagatorSolution sol =
      solve_propagator(problem, Eigen::MatrixXd::Identity(m, m), order, modes, delta, dt);
  CovarianceMap map(m);
  for (std::size_t a = 0; a < sol.indices.size(); ++a)
    map.add_term(1.0 / sol.indices[a].factorial(), transfer_matrix(problem.grid(), sol.end_fields[a]));
  return map;
}

MomentRun wce_second_moments(const DiscreteProblem& problem, const WceParameters& params,
                             const WceOptions& options) {
  if (params.order < 0) throw ConfigError("wce: N must be >= 0");
  if (params.elements == 0) throw ConfigError("wce: need K >= 1");
  MomentRun run;
  const double margin = check_coercivity(problem);
  if (!(margin > 0.0)) {
    std::ostringstream msg;
    msg << "coercivity margin min(2a - sum sigma^2) = " << margin << " is not positive";
    if (options.require_coercive) throw ConfigError(msg.str());
    run.warnings.push_back(msg.str());
  }
  const CovarianceMap map = wce_covariance_map(problem, params.order, params.modes, params.delta, params.dt);
  const Eigen::MatrixXd q0 = initial_covariance(problem.grid(), problem.initial());
  run.moments = propagate_covariance(map, problem.grid(), q0, params.delta, params.elements, options.recursion);
  if (!run.moments.health.symmetric()) run.warnings.push_back("covariance lost symmetry");
  if (!run.moments.health.positive_semidefinite()) {
    std::ostringstream msg;
    msg << "covariance PSD violation: min eig / max eig = " << run.moments.health.worst_eigen_ratio;
    run.warnings.push_back(msg.str());
  }
  return run;
}

}  // namespace spdemoments
