#pragma once

// Recursive multi-stage stochastic collocation for second moments.
//
// On each element the noise is replaced by its n-term spectral truncation
// and the Stratonovich-form PDE is solved at every sparse-grid node y:
//
//   d/dt v = (L~ + sum_k (sum_l y_{k n + l} m_l(t)) M_k) v,   L~ = L - 1/2 sum_k M_k M_k.
//
// The covariance then advances by H <- sum_kappa W_kappa A_kappa^T H A_kappa.

#include <Eigen/Dense>
#include <cstddef>
#include <span>

#include "spdemoments/covariance.hpp"
#include "spdemoments/sparse_grid.hpp"
#include "spdemoments/spatial.hpp"
#include "spdemoments/wce.hpp"

namespace spdemoments {

struct ScmParameters {
  std::size_t level = 2;    // L
  std::size_t modes = 1;    // n
  double delta = 0.1;
  double dt = 0.01;
  std::size_t elements = 1;
};

/// v(Delta) for each column of init. Node entries are laid out k * n + l
/// (noise-major), length n * q.
Eigen::MatrixXd solve_anchored(const DiscreteProblem& problem, const Eigen::MatrixXd& init,
                               std::span<const double> node, std::size_t modes, double delta, double dt);

CovarianceMap scm_covariance_map(const DiscreteProblem& problem, const SparseGridRule& rule, std::size_t modes,
                                 double delta, double dt);

struct ScmOptions {
  RecursionOptions recursion{1, 1e-6, std::nullopt};
};

MomentRun scm_second_moments(const DiscreteProblem& problem, const ScmParameters& params,
                             const ScmOptions& options = {});

}  // namespace spdemoments
