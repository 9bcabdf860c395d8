#pragma once

// Gauss-Hermite rules for the standard Gaussian density and the Smolyak
// combination technique built on them.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace spdemoments {

/// n-point Gauss-Hermite rule against exp(-x^2/2)/sqrt(2 pi).
/// Nodes are sorted ascending and exactly symmetric; weights sum to one.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Nodes from the eigenvalues of the Jacobi matrix (off-diagonals sqrt(k)),
/// weights from w = n! / (n^2 He_{n-1}(y)^2).
GaussHermiteRule gauss_hermite(std::size_t n);

/// Collapsed Smolyak rule: unique points in lexicographic order, each with
/// the accumulated signed weight of all tensor terms that hit it.
class SparseGridRule {
 public:
  SparseGridRule(std::size_t dimension, std::size_t level, std::vector<double> points,
                 std::vector<double> weights);

  std::size_t dimension() const { return dimension_; }
  std::size_t level() const { return level_; }
  std::size_t size() const { return weights_.size(); }

  std::span<const double> point(std::size_t kappa) const {
    return {points_.data() + kappa * dimension_, dimension_};
  }
  double weight(std::size_t kappa) const { return weights_[kappa]; }
  std::span<const double> weights() const { return weights_; }

 private:
  std::size_t dimension_;
  std::size_t level_;
  std::vector<double> points_;  // row-major, size() x dimension()
  std::vector<double> weights_;
};

/// Largest level / dimension built without a size check.
inline constexpr std::size_t kMaxSmolyakLevel = 6;
inline constexpr std::size_t kMaxSmolyakDimension = 32;

/// A(L, d) = sum_{L <= |i| <= L+d-1} (-1)^{L+d-1-|i|} C(d-1, |i|-L) Q_{i_1} x ... x Q_{i_d}
/// where Q_m is the m-point Gauss-Hermite rule. L = 1 is the origin with weight 1.
/// Throws ConfigError("grid too large ...") beyond kMaxSmolyakLevel / kMaxSmolyakDimension.
SparseGridRule smolyak(std::size_t level, std::size_t dimension);

/// Upper bound on the point count of A(L, d): the total size of all tensor
/// terms before deduplication.
double smolyak_projected_points(std::size_t level, std::size_t dimension);

/// Closed-form point counts for L = 2, 3, 4 (valid for d >= 2).
double sparse_grid_point_count_formula(std::size_t level, std::size_t dimension);

using Integrand = std::function<double(std::span<const double>)>;

/// sum_kappa phi(x_kappa) W_kappa, reduced in stored order with compensated summation.
double integrate(const SparseGridRule& rule, const Integrand& phi);

/// CSV with header kappa,x1..xd,W.
void write_csv(const SparseGridRule& rule, std::ostream& out);

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace spdemoments
