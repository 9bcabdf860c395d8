#include "spdemoments/sparse_grid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "spdemoments/error.hpp"
#include "spdemoments/stochastic_basis.hpp"

namespace spdemoments {

namespace {

constexpr double kDedupTolerance = 1e-12;

struct LexLessTol {
  bool operator()(const std::vector<double>& a, const std::vector<double>& b) const {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (a[j] < b[j] - kDedupTolerance) return true;
      if (a[j] > b[j] + kDedupTolerance) return false;
    }
    return false;
  }
};

// All i in N^d with i_j >= 1 and |i| == total, in lexicographic order.
void for_each_level_vector(std::size_t d, std::size_t total,
                           const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> idx(d, 1);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t remaining) {
    if (pos == d - 1) {
      if (remaining >= 1) {
        idx[pos] = remaining;
        fn(idx);
      }
      return;
    }
    // leave at least one unit for each later coordinate
    const std::size_t later = d - 1 - pos;
    if (remaining < later + 1) return;
    for (std::size_t v = 1; v <= remaining - later; ++v) {
      idx[pos] = v;
      rec(pos + 1, remaining - v);
    }
  };
  rec(0, total);
}

double binomial_double(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

}  // namespace

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    compensation_ += (sum_ - t) + x;
  else
    compensation_ += (x - t) + sum_;
  sum_ = t;
}

GaussHermiteRule gauss_hermite(std::size_t n) {
  if (n == 0) throw ConfigError("gauss_hermite: need n >= 1");
  GaussHermiteRule rule;
  if (n == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd off(static_cast<Eigen::Index>(n - 1));
  for (std::size_t k = 1; k < n; ++k) off[static_cast<Eigen::Index>(k - 1)] = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw SolverError("quadrature construction failed for n = " + std::to_string(n));

  std::vector<double> raw(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(raw.begin(), raw.end());
  rule.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = 0.5 * (std::abs(raw[i]) + std::abs(raw[n - 1 - i]));
    rule.nodes[i] = (i < n / 2) ? -mag : mag;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;

  // n! / (n^2 He_{n-1}(y)^2) == 1 / (n h_{n-1}(y)^2) with h = He / sqrt((n-1)!)
  rule.weights.resize(n);
  CompensatedSum total;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = normalized_hermite(static_cast<int>(n - 1), rule.nodes[i]);
    rule.weights[i] = 1.0 / (static_cast<double>(n) * h * h);
    total.add(rule.weights[i]);
  }
  // symmetric pairs get identical weights
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (!std::isfinite(total.value()) || std::abs(total.value() - 1.0) > 1e-8)
    throw SolverError("quadrature construction failed for n = " + std::to_string(n));
  return rule;
}

SparseGridRule::SparseGridRule(std::size_t dimension, std::size_t level, std::vector<double> points,
                               std::vector<double> weights)
    : dimension_(dimension), level_(level), points_(std::move(points)), weights_(std::move(weights)) {
  if (dimension == 0) throw ConfigError("SparseGridRule: zero dimension");
  if (points_.size() != weights_.size() * dimension) throw ConfigError("SparseGridRule: size mismatch");
}

double smolyak_projected_points(std::size_t level, std::size_t dimension) {
  if (level == 0 || dimension == 0) return 0.0;
  // ways[s] = sum over i in N_{>=1}^j with |i| = s of prod i_j
  const std::size_t top = level + dimension - 1;
  std::vector<double> ways(top + 1, 0.0);
  ways[0] = 1.0;
  for (std::size_t j = 0; j < dimension; ++j) {
    std::vector<double> next(top + 1, 0.0);
    for (std::size_t s = 0; s <= top; ++s) {
      if (ways[s] == 0.0) continue;
      for (std::size_t v = 1; s + v <= top; ++v) next[s + v] += ways[s] * static_cast<double>(v);
    }
    ways = std::move(next);
  }
  double total = 0.0;
  for (std::size_t s = std::max(level, dimension); s <= top; ++s) total += ways[s];
  return total;
}

double sparse_grid_point_count_formula(std::size_t level, std::size_t dimension) {
  const double d = static_cast<double>(dimension);
  switch (level) {
    case 1: return 1.0;
    case 2: return 2.0 * d + 1.0;
    case 3: return 2.0 * d * d + 2.0 * d + 1.0;
    case 4: return (4.0 * d * d * d + 6.0 * d * d + 14.0 * d + 3.0) / 3.0;
    default: throw ConfigError("sparse_grid_point_count_formula: closed form only for L <= 4");
  }
}

SparseGridRule smolyak(std::size_t level, std::size_t dimension) {
  if (level == 0 || dimension == 0) throw ConfigError("smolyak: need L >= 1 and d >= 1");
  if (level > kMaxSmolyakLevel || dimension > kMaxSmolyakDimension) {
    std::ostringstream msg;
    msg << "grid too large: L = " << level << ", d = " << dimension << " projects up to "
        << std::setprecision(6) << smolyak_projected_points(level, dimension) << " points";
    throw ConfigError(msg.str());
  }

  const std::size_t d = dimension;
  const std::size_t top = level + d - 1;
  std::vector<GaussHermiteRule> rules(level + 1);
  for (std::size_t m = 1; m <= level; ++m) rules[m] = gauss_hermite(m);

  std::map<std::vector<double>, CompensatedSum, LexLessTol> acc;
  std::vector<double> x(d);
  std::vector<std::size_t> digit(d);

  for (std::size_t total = std::max(level, d); total <= top; ++total) {
    const double sign = ((top - total) % 2 == 0) ? 1.0 : -1.0;
    const double coeff = sign * binomial_double(d - 1, total - level);
    for_each_level_vector(d, total, [&](const std::vector<std::size_t>& idx) {
      // odometer over the tensor product of 1-D rules
      std::fill(digit.begin(), digit.end(), 0);
      while (true) {
        double w = coeff;
        for (std::size_t j = 0; j < d; ++j) {
          const auto& r = rules[idx[j]];
          x[j] = r.nodes[digit[j]];
          w *= r.weights[digit[j]];
        }
        acc[x].add(w);
        bool carry = true;
        for (std::size_t j = d; carry && j > 0;) {
          --j;
          if (++digit[j] < idx[j])
            carry = false;
          else
            digit[j] = 0;
        }
        if (carry) break;
      }
    });
  }

  std::vector<double> points;
  std::vector<double> weights;
  points.reserve(acc.size() * d);
  weights.reserve(acc.size());
  for (const auto& [pt, w] : acc) {
    points.insert(points.end(), pt.begin(), pt.end());
    weights.push_back(w.value());
  }
  return SparseGridRule(d, level, std::move(points), std::move(weights));
}

double integrate(const SparseGridRule& rule, const Integrand& phi) {
  CompensatedSum s;
  for (std::size_t k = 0; k < rule.size(); ++k) s.add(phi(rule.point(k)) * rule.weight(k));
  return s.value();
}

void write_csv(const SparseGridRule& rule, std::ostream& out) {
  out << "kappa";
  for (std::size_t j = 1; j <= rule.dimension(); ++j) out << ",x" << j;
  out << ",W\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    out << k;
    for (double v : rule.point(k)) out << ',' << v;
    out << ',' << rule.weight(k) << '\n';
  }
}

}  // namespace spdemoments
