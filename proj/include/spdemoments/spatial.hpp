#pragma once

// Periodic Fourier collocation on (0, 2 pi): grid, dense spectral
// differentiation matrices, the real trigonometric CONS, and the collocated
// drift / noise operators of a linear SPDE
//
//   du = L u dt + sum_k M_k u dw_k,
//   L u   = a u'' + b u' + c u,
//   M_k u = sigma_k u' + nu_k u.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace spdemoments {

using Coefficient = std::function<double(double)>;

class FourierGrid {
 public:
  /// Largest supported grid; covariance maps are O(M^4) in memory.
  static constexpr std::size_t kMaxPoints = 64;

  explicit FourierGrid(std::size_t points);

  std::size_t size() const { return size_; }
  const Eigen::VectorXd& points() const { return points_; }
  double spacing() const { return spacing_; }

  const Eigen::MatrixXd& first_derivative() const { return d1_; }
  const Eigen::MatrixXd& second_derivative() const { return d2_; }

  /// basis()(i, m) = e_m(x_i): e_0 = 1/sqrt(2 pi), then cos(jx)/sqrt(pi),
  /// sin(jx)/sqrt(pi) for j < M/2, and the Nyquist cosine cos(Mx/2)/sqrt(2 pi).
  /// Orthonormal under inner_product().
  const Eigen::MatrixXd& basis() const { return basis_; }

  /// (u, v)_M = (2 pi / M) sum_m u_m v_m
  double inner_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

  /// Coefficients (v, e_m)_M for all m.
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;

  /// Samples f at the collocation points.
  Eigen::VectorXd sample(const Coefficient& f) const;

 private:
  std::size_t size_;
  double spacing_;
  Eigen::VectorXd points_;
  Eigen::MatrixXd d1_;
  Eigen::MatrixXd d2_;
  Eigen::MatrixXd basis_;
};

/// Derivative of the trigonometric interpolant; order 1 zeroes the Nyquist mode.
Eigen::VectorXd spectral_derivative(const FourierGrid& grid, const Eigen::VectorXd& v, int order);

struct NoiseCoefficients {
  Coefficient sigma;  // advection part, multiplies u'
  Coefficient nu;     // reaction part, multiplies u
};

/// Ito-form problem data on the periodic domain.
struct SpdeProblem {
  std::string name;
  Coefficient a;
  Coefficient b;
  Coefficient c;
  std::vector<NoiseCoefficients> noises;
  Coefficient u0;

  std::size_t noise_count() const { return noises.size(); }
};

/// Max over the grid of |f(x_1) - f(x_1 + 2 pi)| across every coefficient.
double periodicity_defect(const SpdeProblem& problem, const FourierGrid& grid);

/// Problem coefficients sampled onto a grid, with L, M_k and the
/// Stratonovich drift L - 1/2 sum_k M_k M_k assembled as dense matrices.
class DiscreteProblem {
 public:
  DiscreteProblem(const SpdeProblem& problem, const FourierGrid& grid);

  const FourierGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }
  std::size_t noise_count() const { return noise_ops_.size(); }

  const Eigen::MatrixXd& drift() const { return drift_; }
  const Eigen::MatrixXd& stratonovich_drift() const { return strat_drift_; }
  const Eigen::MatrixXd& noise(std::size_t k) const { return noise_ops_.at(k); }
  const Eigen::VectorXd& initial() const { return u0_; }

  const Eigen::VectorXd& a() const { return a_; }
  const Eigen::VectorXd& sigma(std::size_t k) const { return sigma_.at(k); }

 private:
  FourierGrid grid_;
  Eigen::VectorXd a_;
  std::vector<Eigen::VectorXd> sigma_;
  Eigen::MatrixXd drift_;
  Eigen::MatrixXd strat_drift_;
  std::vector<Eigen::MatrixXd> noise_ops_;
  Eigen::VectorXd u0_;
};

Eigen::VectorXd apply_L(const DiscreteProblem& p, const Eigen::VectorXd& v);
Eigen::VectorXd apply_M(const DiscreteProblem& p, std::size_t k, const Eigen::VectorXd& v);
Eigen::VectorXd apply_L_stratonovich(const DiscreteProblem& p, const Eigen::VectorXd& v);

struct CommutativityReport {
  bool commutative;
  double max_defect;
};

inline constexpr double kCommutativityThreshold = 1e-8;

/// Compares M_k M_j and M_j M_k on the probes {1, cos jx, sin jx : j <= M/4}.
CommutativityReport check_commutativity(const DiscreteProblem& p);

/// min_x 2 a(x) - sum_k sigma_k(x)^2; positive means strongly parabolic.
double check_coercivity(const DiscreteProblem& p);

}  // namespace spdemoments
