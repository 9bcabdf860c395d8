#include "spdemoments/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spdemoments/error.hpp"

namespace spdemoments {

CovarianceMap::CovarianceMap(Eigen::Index size)
    : size_(size), kernel_(Eigen::MatrixXd::Zero(size * size, size * size)) {
  if (size <= 0) throw ConfigError("CovarianceMap: empty basis");
}

void CovarianceMap::add_term(double weight, const Eigen::MatrixXd& transfer) {
  if (transfer.rows() != size_ || transfer.cols() != size_) throw ConfigError("CovarianceMap: transfer size mismatch");
  // vec(A^T Q A) = (A^T kron A^T) vec(Q)
  const Eigen::MatrixXd at = transfer.transpose();
  for (Eigen::Index c = 0; c < size_; ++c) {
    for (Eigen::Index r = 0; r < size_; ++r) {
      const double s = weight * at(r, c);
      if (s == 0.0) continue;
      kernel_.block(r * size_, c * size_, size_, size_) += s * at;
    }
  }
  ++terms_;
}

Eigen::MatrixXd CovarianceMap::apply(const Eigen::MatrixXd& q) const {
  Eigen::MatrixXd out(size_, size_);
  Eigen::Map<Eigen::VectorXd>(out.data(), size_ * size_).noalias() =
      kernel_ * Eigen::Map<const Eigen::VectorXd>(q.data(), size_ * size_);
  return out;
}

Eigen::VectorXd second_moment_field(const FourierGrid& grid, const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd& e = grid.basis();
  return (e * q).cwiseProduct(e).rowwise().sum();
}

Eigen::MatrixXd initial_covariance(const FourierGrid& grid, const Eigen::VectorXd& u0) {
  const Eigen::VectorXd c = grid.project(u0);
  return c * c.transpose();
}

Eigen::MatrixXd transfer_matrix(const FourierGrid& grid, const Eigen::MatrixXd& nodal_propagator) {
  // (P e_j, e_l)_M = spacing * (E^T P E)(l, j)
  const Eigen::MatrixXd& e = grid.basis();
  return grid.spacing() * (e.transpose() * nodal_propagator * e).transpose();
}

namespace {

void inspect(const Eigen::MatrixXd& q, CovarianceHealth& health, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& eig) {
  const double scale = q.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  const double asym = (q - q.transpose()).cwiseAbs().maxCoeff() / scale;
  health.max_asymmetry = std::max(health.max_asymmetry, asym);
  eig.compute(0.5 * (q + q.transpose()), Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmax > 0.0) health.worst_eigen_ratio = std::min(health.worst_eigen_ratio, lmin / lmax);
}

}  // namespace

SecondMomentResult propagate_covariance(const CovarianceMap& map, const FourierGrid& grid,
                                        const Eigen::MatrixXd& q0, double delta, std::size_t elements,
                                        const RecursionOptions& options) {
  if (q0.rows() != map.size() || q0.cols() != map.size()) throw ConfigError("propagate_covariance: size mismatch");
  if (elements == 0) throw ConfigError("propagate_covariance: need at least one element");

  SecondMomentResult result;
  result.health.psd_tolerance = options.psd_tolerance;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(map.size());

  Eigen::MatrixXd q = q0;
  for (std::size_t i = 1; i <= elements; ++i) {
    q = map.apply(q);
    inspect(q, result.health, eig);
    const bool last = i == elements;
    if (last || (options.record_every != 0 && i % options.record_every == 0)) {
      SecondMomentSnapshot snap;
      snap.time = static_cast<double>(i) * delta;
      snap.field = second_moment_field(grid, q);
      snap.trace = q.trace();
      result.snapshots.push_back(std::move(snap));
    }
    if (options.deadline && (i % 256 == 0) && std::chrono::steady_clock::now() > *options.deadline)
      throw SolverError("covariance recursion exceeded its time budget after " + std::to_string(i) + " of " +
                        std::to_string(elements) + " elements");
  }
  result.final_covariance = {q, static_cast<double>(elements) * delta};
  return result;
}

}  // namespace spdemoments
