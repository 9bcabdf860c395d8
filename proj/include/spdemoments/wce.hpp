#pragma once

// Recursive multi-stage Wiener chaos expansion for second moments.
//
// Per element [0, Delta] the chaos coefficients phi_alpha solve the
// lower-triangular propagator
//
//   d/dt phi_alpha = L phi_alpha + sum_{k,l} alpha_{k,l} m_l(t) M_k phi_{alpha^-(k,l)},
//   phi_alpha(0) = u_init * 1{|alpha| = 0},
//
// and the covariance in the spatial CONS advances by
//
//   Q(t_i) = sum_alpha (1/alpha!) A_alpha^T Q(t_{i-1}) A_alpha,
//   A_alpha(j, l) = (phi_alpha(Delta; e_j), e_l).

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "spdemoments/covariance.hpp"
#include "spdemoments/spatial.hpp"
#include "spdemoments/stochastic_basis.hpp"

namespace spdemoments {

struct WceParameters {
  int order = 1;            // N
  std::size_t modes = 1;    // n
  double delta = 0.1;       // element length
  double dt = 0.01;         // CN step inside an element
  std::size_t elements = 1; // K
};

struct PropagatorSolution {
  MultiIndexSet indices;
  std::vector<Eigen::MatrixXd> end_fields;  // phi_alpha(Delta), same shape as the initial data
};

/// Solves levels |alpha| = 0..N in graded order. init may carry several
/// columns (one initial condition each); init = I yields nodal propagators.
PropagatorSolution solve_propagator(const DiscreteProblem& problem, const Eigen::MatrixXd& init, int order,
                                    std::size_t modes, double delta, double dt);

/// Steps 1-2: propagators for every basis function folded into the map.
CovarianceMap wce_covariance_map(const DiscreteProblem& problem, int order, std::size_t modes, double delta,
                                 double dt);

struct WceOptions {
  RecursionOptions recursion;
  /// Refuse to run when 2a - sum sigma^2 <= 0 instead of warning.
  bool require_coercive = false;
};

struct MomentRun {
  SecondMomentResult moments;
  std::vector<std::string> warnings;
};

MomentRun wce_second_moments(const DiscreteProblem& problem, const WceParameters& params,
                             const WceOptions& options = {});

}  // namespace spdemoments
