#include "spdemoments/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spdemoments/error.hpp"

namespace spdemoments {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

FourierGrid::FourierGrid(std::size_t points) : size_(points) {
  if (points < 2 || points % 2 != 0) throw ConfigError("FourierGrid: M must be even and >= 2");
  if (points > kMaxPoints) throw ConfigError("FourierGrid: M > 64 is not supported");
  const auto m = static_cast<Eigen::Index>(points);
  spacing_ = kTwoPi / static_cast<double>(points);
  points_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) points_[i] = spacing_ * static_cast<double>(i);

  // Trefethen's periodic differentiation matrices for even M
  d1_ = Eigen::MatrixXd::Zero(m, m);
  d2_ = Eigen::MatrixXd::Zero(m, m);
  const double h = spacing_;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) {
        d2_(i, j) = -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0;
        continue;
      }
      const double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      const double half = 0.5 * static_cast<double>(i - j) * h;
      d1_(i, j) = 0.5 * sign / std::tan(half);
      const double s = std::sin(half);
      d2_(i, j) = -0.5 * sign / (s * s);
    }
  }

  basis_.resize(m, m);
  const double c0 = 1.0 / std::sqrt(kTwoPi);
  const double c1 = 1.0 / std::sqrt(std::numbers::pi);
  const Eigen::Index half = m / 2;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = points_[i];
    basis_(i, 0) = c0;
    for (Eigen::Index j = 1; j < half; ++j) {
      basis_(i, 2 * j - 1) = c1 * std::cos(static_cast<double>(j) * x);
      basis_(i, 2 * j) = c1 * std::sin(static_cast<double>(j) * x);
    }
    basis_(i, m - 1) = c0 * std::cos(static_cast<double>(half) * x);
  }
}

double FourierGrid::inner_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  return spacing_ * u.dot(v);
}

Eigen::VectorXd FourierGrid::project(const Eigen::VectorXd& v) const {
  return spacing_ * (basis_.transpose() * v);
}

Eigen::VectorXd FourierGrid::sample(const Coefficient& f) const {
  Eigen::VectorXd out(points_.size());
  for (Eigen::Index i = 0; i < points_.size(); ++i) out[i] = f ? f(points_[i]) : 0.0;
  return out;
}

Eigen::VectorXd spectral_derivative(const FourierGrid& grid, const Eigen::VectorXd& v, int order) {
  if (v.size() != static_cast<Eigen::Index>(grid.size())) throw ConfigError("spectral_derivative: size mismatch");
  if (order == 1) return grid.first_derivative() * v;
  if (order == 2) return grid.second_derivative() * v;
  throw ConfigError("spectral_derivative: order must be 1 or 2");
}

double periodicity_defect(const SpdeProblem& problem, const FourierGrid& grid) {
  const double x = grid.points()[0];
  double worst = 0.0;
  auto probe = [&](const Coefficient& f) {
    if (f) worst = std::max(worst, std::abs(f(x) - f(x + kTwoPi)));
  };
  probe(problem.a);
  probe(problem.b);
  probe(problem.c);
  probe(problem.u0);
  for (const auto& n : problem.noises) {
    probe(n.sigma);
    probe(n.nu);
  }
  return worst;
}

DiscreteProblem::DiscreteProblem(const SpdeProblem& problem, const FourierGrid& grid) : grid_(grid) {
  a_ = grid.sample(problem.a);
  const Eigen::VectorXd b = grid.sample(problem.b);
  const Eigen::VectorXd c = grid.sample(problem.c);
  drift_ = a_.asDiagonal() * grid.second_derivative();
  drift_ += b.asDiagonal() * grid.first_derivative();
  drift_.diagonal() += c;

  strat_drift_ = drift_;
  for (const auto& n : problem.noises) {
    const Eigen::VectorXd sigma = grid.sample(n.sigma);
    const Eigen::VectorXd nu = grid.sample(n.nu);
    Eigen::MatrixXd op = sigma.asDiagonal() * grid.first_derivative();
    op.diagonal() += nu;
    strat_drift_.noalias() -= 0.5 * op * op;
    sigma_.push_back(sigma);
    noise_ops_.push_back(std::move(op));
  }
  u0_ = grid.sample(problem.u0);
}

Eigen::VectorXd apply_L(const DiscreteProblem& p, const Eigen::VectorXd& v) { return p.drift() * v; }

Eigen::VectorXd apply_M(const DiscreteProblem& p, std::size_t k, const Eigen::VectorXd& v) {
  if (k >= p.noise_count()) throw ConfigError("apply_M: noise index out of range");
  return p.noise(k) * v;
}

Eigen::VectorXd apply_L_stratonovich(const DiscreteProblem& p, const Eigen::VectorXd& v) {
  return p.stratonovich_drift() * v;
}

CommutativityReport check_commutativity(const DiscreteProblem& p) {
  const auto& grid = p.grid();
  const Eigen::Index m = static_cast<Eigen::Index>(grid.size());
  std::vector<Eigen::VectorXd> probes;
  probes.push_back(Eigen::VectorXd::Ones(m));
  for (std::size_t j = 1; j <= grid.size() / 4; ++j) {
    const double w = static_cast<double>(j);
    probes.push_back(grid.points().unaryExpr([w](double x) { return std::cos(w * x); }));
    probes.push_back(grid.points().unaryExpr([w](double x) { return std::sin(w * x); }));
  }
  double defect = 0.0;
  for (std::size_t k = 0; k < p.noise_count(); ++k) {
    for (std::size_t j = k + 1; j < p.noise_count(); ++j) {
      for (const auto& v : probes) {
        const Eigen::VectorXd kj = p.noise(k) * (p.noise(j) * v);
        const Eigen::VectorXd jk = p.noise(j) * (p.noise(k) * v);
        defect = std::max(defect, (kj - jk).cwiseAbs().maxCoeff());
      }
    }
  }
  return {defect < kCommutativityThreshold, defect};
}

double check_coercivity(const DiscreteProblem& p) {
  Eigen::VectorXd margin = 2.0 * p.a();
  for (std::size_t k = 0; k < p.noise_count(); ++k) margin -= p.sigma(k).cwiseProduct(p.sigma(k));
  return margin.minCoeff();
}

}  // namespace spdemoments
