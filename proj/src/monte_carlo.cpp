#include "spdemoments/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spdemoments/crank_nicolson.hpp"
#include "spdemoments/error.hpp"
#include "spdemoments/philox.hpp"

namespace spdemoments {

McEstimate mc_second_moments(const DiscreteProblem& problem, std::size_t paths, double T, double dt,
                             std::uint64_t seed, const McOptions& options) {
  if (!(dt > 0.0)) throw ConfigError("mc: nonpositive dt");
  if (paths < 2) throw ConfigError("mc: need at least 2 paths");
  if (options.batch == 0) throw ConfigError("mc: batch must be positive");
  const std::size_t steps = step_count(T, dt);
  const std::size_t q = problem.noise_count();
  const auto m = static_cast<Eigen::Index>(problem.size());

  const CrankNicolsonStep cn(problem.drift(), dt);
  const Eigen::MatrixXd amp = cn.amplification();
  std::vector<Eigen::MatrixXd> kick(q);
  for (std::size_t k = 0; k < q; ++k) kick[k] = cn.solve(problem.noise(k));

  const double sqrt_dt = std::sqrt(dt);
  // Sums of u^2 - shift and their outer products; the shift (first batch
  // mean) keeps the variance free of cancellation.
  Eigen::VectorXd shift;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(m, m);

  for (std::size_t first = 0; first < paths; first += options.batch) {
    const std::size_t count = std::min(options.batch, paths - first);
    const auto cols = static_cast<Eigen::Index>(count);
    std::vector<NormalStream> streams;
    streams.reserve(count);
    for (std::size_t p = 0; p < count; ++p) streams.emplace_back(seed, first + p);

    Eigen::MatrixXd u = problem.initial().replicate(1, cols);
    Eigen::MatrixXd next(m, cols);
    Eigen::VectorXd dw(cols);
    for (std::size_t j = 0; j < steps; ++j) {
      next.noalias() = amp * u;
      for (std::size_t k = 0; k < q; ++k) {
        for (Eigen::Index p = 0; p < cols; ++p) dw(p) = sqrt_dt * streams[p].next();
        next.noalias() += kick[k] * (u * dw.asDiagonal());
      }
      u.swap(next);
    }
    if (first == 0) shift = u.cwiseAbs2().rowwise().mean();
    const Eigen::MatrixXd sq = u.cwiseAbs2().colwise() - shift;
    s1 += sq.rowwise().sum();
    s2.noalias() += sq * sq.transpose();
  }

  const double n = static_cast<double>(paths);
  McEstimate est;
  est.paths = paths;
  est.seed = seed;
  const Eigen::VectorXd mean_offset = s1 / n;
  est.field = shift + mean_offset;
  const Eigen::MatrixXd cov = (s2 - n * mean_offset * mean_offset.transpose()) / (n - 1.0);
  est.std_error = (cov.diagonal().cwiseMax(0.0) / n).cwiseSqrt();

  const double h = problem.grid().spacing();
  est.l2_norm = std::sqrt(h * est.field.squaredNorm());
  est.linf_norm = est.field.cwiseAbs().maxCoeff();
  if (est.l2_norm > 0.0) {
    const Eigen::VectorXd grad = (h / est.l2_norm) * est.field;
    est.l2_std_error = std::sqrt(std::max(0.0, grad.dot(cov * grad)) / n);
  }
  return est;
}

}  // namespace spdemoments
