#pragma once

// Element-to-element propagation of the second-moment (covariance) matrix
// in the spatial CONS. Both the chaos and the collocation recursions have
// the form
//
//   Q(t_i) = sum_s w_s A_s^T Q(t_{i-1}) A_s,
//
// with A_s(j, l) = (phi_s(Delta; e_j), e_l); only the terms and weights differ.

#include <Eigen/Dense>
#include <chrono>
#include <cstddef>
#include <optional>
#include <vector>

#include "spdemoments/spatial.hpp"

namespace spdemoments {

struct CovarianceMatrix {
  Eigen::MatrixXd entries;
  double time = 0.0;
};

/// Worst-case structure diagnostics over every element of a run.
struct CovarianceHealth {
  double max_asymmetry = 0.0;      // max_i |Q - Q^T|_max / |Q|_max
  double worst_eigen_ratio = 0.0;  // min_i lambda_min / lambda_max
  double psd_tolerance = 1e-8;
  double symmetry_tolerance = 1e-10;

  bool symmetric() const { return max_asymmetry <= symmetry_tolerance; }
  bool positive_semidefinite() const { return worst_eigen_ratio >= -psd_tolerance; }
};

/// The linear map Q -> sum_s w_s A_s^T Q A_s stored as an M^2 x M^2 kernel
/// acting on column-major vec(Q).
class CovarianceMap {
 public:
  explicit CovarianceMap(Eigen::Index size);

  Eigen::Index size() const { return size_; }
  std::size_t terms() const { return terms_; }

  void add_term(double weight, const Eigen::MatrixXd& transfer);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& q) const;
  const Eigen::MatrixXd& kernel() const { return kernel_; }

 private:
  Eigen::Index size_;
  std::size_t terms_ = 0;
  Eigen::MatrixXd kernel_;
};

struct RecursionOptions {
  /// Keep a snapshot every this many elements (the final element is always
  /// kept); 0 keeps only the final one.
  std::size_t record_every = 1;
  double psd_tolerance = 1e-8;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct SecondMomentSnapshot {
  double time = 0.0;
  Eigen::VectorXd field;  // E[u^2] at the collocation points
  double trace = 0.0;     // trace of the covariance matrix
};

struct SecondMomentResult {
  std::vector<SecondMomentSnapshot> snapshots;
  CovarianceMatrix final_covariance;
  CovarianceHealth health;

  const SecondMomentSnapshot& final_snapshot() const { return snapshots.back(); }
};

/// sum_{l,m} Q_lm e_l(x) e_m(x) at the collocation points.
Eigen::VectorXd second_moment_field(const FourierGrid& grid, const Eigen::MatrixXd& q);

/// Initial covariance (u0, e_l)(u0, e_m).
Eigen::MatrixXd initial_covariance(const FourierGrid& grid, const Eigen::VectorXd& u0);

/// Runs the recursion for `elements` steps from q0 at t = 0.
/// Throws SolverError when the deadline passes.
SecondMomentResult propagate_covariance(const CovarianceMap& map, const FourierGrid& grid,
                                        const Eigen::MatrixXd& q0, double delta, std::size_t elements,
                                        const RecursionOptions& options);

/// Transfer matrix A(j, l) = (P e_j, e_l) for a nodal element propagator P.
Eigen::MatrixXd transfer_matrix(const FourierGrid& grid, const Eigen::MatrixXd& nodal_propagator);

}  // namespace spdemoments
