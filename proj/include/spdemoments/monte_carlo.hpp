#pragma once

// Path sampling of the Ito SPDE: CN on the drift, Euler-Maruyama on the noise,
//
//   (I - dt/2 L) u_{j+1} = (I + dt/2 L) u_j + sum_k M_k u_j dW_k.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>

#include "spdemoments/spatial.hpp"

namespace spdemoments {

struct McEstimate {
  Eigen::VectorXd field;      // sample mean of u(T)^2
  Eigen::VectorXd std_error;  // pointwise sample std / sqrt(paths)
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  double l2_norm = 0.0;
  double l2_std_error = 0.0;  // delta method on the discrete l2 norm
  double linf_norm = 0.0;
};

struct McOptions {
  std::size_t batch = 256;  // paths advanced together as matrix columns
};

McEstimate mc_second_moments(const DiscreteProblem& problem, std::size_t paths, double T, double dt,
                             std::uint64_t seed, const McOptions& options = {});

}  // namespace spdemoments
