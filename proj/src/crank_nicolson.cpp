#include "spdemoments/crank_nicolson.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "spdemoments/error.hpp"

namespace spdemoments {

namespace {
constexpr double kMinReciprocalCondition = 1e-13;
}

std::size_t step_count(double length, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (!(length > 0.0)) throw ConfigError("element length must be positive");
  const double ratio = length / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("step does not divide element: Delta/dt = " + std::to_string(ratio));
  return static_cast<std::size_t>(rounded);
}

CrankNicolsonStep::CrankNicolsonStep(const Eigen::MatrixXd& drift, double dt) : dt_(dt) {
  if (drift.rows() != drift.cols()) throw ConfigError("CN: drift must be square");
  const Eigen::Index m = drift.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  scaled_drift_ = dt * drift;
  implicit_lu_.compute(id - 0.5 * scaled_drift_);
  const double rcond = implicit_lu_.rcond();
  if (!(rcond > kMinReciprocalCondition))
    throw SolverError("CN solve failed: implicit matrix is singular (rcond = " + std::to_string(rcond) +
                      "), dt too large for the drift");
}

// Increment form u + (I - dt/2 A)^{-1} (dt A u + extra): same step, but the
// rounding error scales with the increment rather than with u.
Eigen::MatrixXd CrankNicolsonStep::advance(const Eigen::MatrixXd& u) const {
  return u + implicit_lu_.solve(scaled_drift_ * u);
}

Eigen::MatrixXd CrankNicolsonStep::advance(const Eigen::MatrixXd& u, const Eigen::MatrixXd& rhs_extra) const {
  Eigen::MatrixXd rhs = scaled_drift_ * u;
  rhs += rhs_extra;
  return u + implicit_lu_.solve(rhs);
}

Eigen::MatrixXd CrankNicolsonStep::amplification() const {
  const Eigen::Index m = scaled_drift_.rows();
  return Eigen::MatrixXd::Identity(m, m) + implicit_lu_.solve(scaled_drift_);
}

Eigen::MatrixXd CrankNicolsonStep::solve(const Eigen::MatrixXd& b) const { return implicit_lu_.solve(b); }

std::vector<Eigen::MatrixXd> crank_nicolson(const LinearEvolution& evolution, const Eigen::MatrixXd& u0,
                                            double length, double dt) {
  if (!evolution.drift) throw ConfigError("CN: drift closure missing");
  if (u0.rows() != evolution.dimension) throw ConfigError("CN: initial state has wrong dimension");
  const std::size_t steps = step_count(length, dt);

  std::vector<Eigen::MatrixXd> traj;
  traj.reserve(steps + 1);
  traj.push_back(u0);

  std::optional<CrankNicolsonStep> fixed;
  if (evolution.constant_drift) fixed.emplace(evolution.drift(0.5 * dt), dt);

  Eigen::MatrixXd f_prev;
  if (evolution.forcing) f_prev = evolution.forcing(0, 0.0);

  for (std::size_t j = 0; j < steps; ++j) {
    const double t0 = static_cast<double>(j) * dt;
    const double t1 = static_cast<double>(j + 1) * dt;
    std::optional<CrankNicolsonStep> local;
    if (!fixed) local.emplace(evolution.drift(0.5 * (t0 + t1)), dt);
    const CrankNicolsonStep& stepper = fixed ? *fixed : *local;

    if (evolution.forcing) {
      Eigen::MatrixXd f_next = evolution.forcing(j + 1, t1);
      traj.push_back(stepper.advance(traj.back(), 0.5 * dt * (f_prev + f_next)));
      f_prev = std::move(f_next);
    } else {
      traj.push_back(stepper.advance(traj.back()));
    }
  }
  return traj;
}

}  // namespace spdemoments
