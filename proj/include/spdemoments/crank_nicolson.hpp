#pragma once

// Crank-Nicolson for du/dt = A(t) u + f(t) on one element [0, Delta].
// States are M x r matrices so that r initial conditions advance together.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <vector>

namespace spdemoments {

struct LinearEvolution {
  Eigen::Index dimension = 0;
  /// A(t); sampled at interval midpoints.
  std::function<Eigen::MatrixXd(double)> drift;
  /// When set, A is factored once and reused for every step.
  bool constant_drift = false;
  /// f at step index j (time t_j = j dt); may be empty.
  std::function<Eigen::MatrixXd(std::size_t, double)> forcing;
};

/// Number of steps of size dt in length; throws ConfigError
/// ("step does not divide element") when the ratio is not an integer.
std::size_t step_count(double length, double dt);

/// One factored CN step for a fixed drift matrix:
///   (I - dt/2 A) u_next = (I + dt/2 A) u + rhs_extra.
class CrankNicolsonStep {
 public:
  CrankNicolsonStep(const Eigen::MatrixXd& drift, double dt);

  double dt() const { return dt_; }
  Eigen::MatrixXd advance(const Eigen::MatrixXd& u) const;
  Eigen::MatrixXd advance(const Eigen::MatrixXd& u, const Eigen::MatrixXd& rhs_extra) const;

  /// (I - dt/2 A)^{-1} (I + dt/2 A)
  Eigen::MatrixXd amplification() const;
  /// (I - dt/2 A)^{-1} B
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

 private:
  double dt_;
  Eigen::MatrixXd scaled_drift_;  // dt A
  Eigen::PartialPivLU<Eigen::MatrixXd> implicit_lu_;
};

/// Full trajectory u(0), u(dt), ..., u(Delta).
/// Throws SolverError("CN solve failed") on a numerically singular system.
std::vector<Eigen::MatrixXd> crank_nicolson(const LinearEvolution& evolution, const Eigen::MatrixXd& u0,
                                            double length, double dt);

}  // namespace spdemoments
