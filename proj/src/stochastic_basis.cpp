#include "spdemoments/stochastic_basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "spdemoments/error.hpp"

namespace spdemoments {

double hermite(int n, double x) {
  if (n < 0) throw ConfigError("hermite: negative degree");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double normalized_hermite(int n, double x) {
  if (n < 0) throw ConfigError("normalized_hermite: negative degree");
  if (n == 0) return 1.0;
  // h_{k+1} = (x h_k - sqrt(k) h_{k-1}) / sqrt(k+1)
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                        std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

double factorial(int n) {
  if (n < 0) throw ConfigError("factorial: negative argument");
  if (n <= 20) {
    unsigned long long r = 1;
    for (int k = 2; k <= n; ++k) r *= static_cast<unsigned long long>(k);
    return static_cast<double>(r);
  }
  return std::exp(std::lgamma(static_cast<double>(n) + 1.0));
}

std::size_t checked_binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays integral at every step
    const std::size_t factor = n - k + i;
    const std::size_t g = std::gcd(r, i);
    const std::size_t rr = r / g;
    const std::size_t ii = i / g;
    const std::size_t f = factor / ii;  // ii divides factor once r's share is removed
    if (rr != 0 && f > std::numeric_limits<std::size_t>::max() / rr) {
      throw ConfigError("truncation too large: C(" + std::to_string(n) + ", " +
                        std::to_string(k) + ") overflows");
    }
    r = rr * f;
  }
  return r;
}

MultiIndex::MultiIndex(std::size_t noises, std::size_t modes)
    : noises_(noises), modes_(modes), entries_(noises * modes, 0) {
  if (noises == 0 || modes == 0) throw ConfigError("MultiIndex: empty shape");
}

MultiIndex::MultiIndex(std::size_t noises, std::size_t modes, std::vector<int> entries)
    : noises_(noises), modes_(modes), entries_(std::move(entries)) {
  if (noises == 0 || modes == 0) throw ConfigError("MultiIndex: empty shape");
  if (entries_.size() != noises * modes) throw ConfigError("MultiIndex: entry count mismatch");
  for (int e : entries_) {
    if (e < 0) throw ConfigError("MultiIndex: negative entry");
    order_ += e;
  }
}

void MultiIndex::set(std::size_t k, std::size_t l, int value) {
  if (value < 0) throw ConfigError("MultiIndex: negative entry");
  int& slot = entries_.at(k * modes_ + l);
  order_ += value - slot;
  slot = value;
}

MultiIndex MultiIndex::minus(std::size_t k, std::size_t l) const {
  if (k >= noises_ || l >= modes_) throw ConfigError("alpha_minus: index out of range");
  MultiIndex out = *this;
  const int v = entries_[k * modes_ + l];
  if (v > 0) out.set(k, l, v - 1);
  return out;
}

double MultiIndex::factorial() const {
  if (order_ <= 20) {
    unsigned long long r = 1;
    for (int e : entries_)
      for (int j = 2; j <= e; ++j) r *= static_cast<unsigned long long>(j);
    return static_cast<double>(r);
  }
  double logsum = 0.0;
  for (int e : entries_) logsum += std::lgamma(static_cast<double>(e) + 1.0);
  return std::exp(logsum);
}

MultiIndex alpha_minus(const MultiIndex& alpha, std::size_t k, std::size_t l) {
  return alpha.minus(k, l);
}

double wick_coefficient(const MultiIndex& alpha, const MultiIndex& beta) {
  if (alpha.noises() != beta.noises() || alpha.modes() != beta.modes())
    throw ConfigError("wick_coefficient: shape mismatch");
  const auto a = alpha.entries();
  const auto b = beta.entries();
  if (alpha.order() + beta.order() <= 20) {
    std::vector<int> sum(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) sum[i] = a[i] + b[i];
    const MultiIndex s(alpha.noises(), alpha.modes(), std::move(sum));
    return std::sqrt(s.factorial() / (alpha.factorial() * beta.factorial()));
  }
  double log_ratio = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    log_ratio += std::lgamma(a[i] + b[i] + 1.0) - std::lgamma(a[i] + 1.0) - std::lgamma(b[i] + 1.0);
  }
  return std::exp(0.5 * log_ratio);
}

MultiIndexSet::MultiIndexSet(int max_order, std::size_t modes, std::size_t noises)
    : max_order_(max_order), modes_(modes), noises_(noises) {
  if (max_order < 0) throw ConfigError("enumerate_multiindices: N must be >= 0");
  if (modes == 0 || noises == 0) throw ConfigError("enumerate_multiindices: n and q must be >= 1");
  const std::size_t dim = modes * noises;
  const std::size_t count = checked_binomial(static_cast<std::size_t>(max_order) + dim,
                                             static_cast<std::size_t>(max_order));
  if (count > (std::size_t{1} << 26)) {
    throw ConfigError("truncation too large: " + std::to_string(count) + " multi-indices");
  }
  indices_.reserve(count);

  // For each order, walk compositions of `order` into `dim` parts in
  // ascending lexicographic order of the flattened entries.
  std::vector<int> e(dim, 0);
  for (int order = 0; order <= max_order; ++order) {
    std::fill(e.begin(), e.end(), 0);
    e[dim - 1] = order;
    while (true) {
      indices_.emplace_back(noises, modes, e);
      // next composition in lex order: find rightmost position p < dim-1
      // that can be incremented while taking one unit from the tail
      std::size_t p = dim - 1;
      bool found = false;
      while (p > 0) {
        --p;
        int tail = 0;
        for (std::size_t j = p + 1; j < dim; ++j) tail += e[j];
        if (tail > 0) {
          ++e[p];
          for (std::size_t j = p + 1; j < dim; ++j) e[j] = 0;
          e[dim - 1] = tail - 1;
          found = true;
          break;
        }
      }
      if (!found) break;
    }
  }
}

std::size_t MultiIndexSet::position(const MultiIndex& alpha) const {
  // graded ordering: binary search within the order block
  auto lo = std::lower_bound(indices_.begin(), indices_.end(), alpha,
                             [](const MultiIndex& a, const MultiIndex& b) {
                               if (a.order() != b.order()) return a.order() < b.order();
                               return a < b;
                             });
  if (lo == indices_.end() || !(*lo == alpha)) throw ConfigError("multi-index not in set");
  return static_cast<std::size_t>(lo - indices_.begin());
}

MultiIndexSet enumerate_multiindices(int max_order, std::size_t modes, std::size_t noises) {
  return MultiIndexSet(max_order, modes, noises);
}

TemporalBasis::TemporalBasis(double element_length, std::size_t count)
    : length_(element_length), count_(count) {
  if (!(element_length > 0.0)) throw ConfigError("TemporalBasis: element length must be positive");
  if (count == 0) throw ConfigError("TemporalBasis: need at least one mode");
}

double TemporalBasis::value(std::size_t l, double s) const {
  if (l == 0) return 1.0 / std::sqrt(length_);
  return std::sqrt(2.0 / length_) * std::cos(std::numbers::pi * static_cast<double>(l) * s / length_);
}

double TemporalBasis::antiderivative(std::size_t l, double t) const {
  if (l == 0) return t / std::sqrt(length_);
  const double w = std::numbers::pi * static_cast<double>(l);
  return std::sqrt(2.0 * length_) / w * std::sin(w * t / length_);
}

double antiderivative_M(std::size_t l, double t, const TemporalBasis& basis) {
  return basis.antiderivative(l, t);
}

BrownianTruncation::BrownianTruncation(TemporalBasis basis, std::size_t elements,
                                       std::size_t noises, std::vector<double> coefficients)
    : basis_(basis), elements_(elements), noises_(noises), coefficients_(std::move(coefficients)) {
  if (elements == 0 || noises == 0) throw ConfigError("BrownianTruncation: empty shape");
  if (coefficients_.size() != elements * basis.count() * noises)
    throw ConfigError("BrownianTruncation: coefficient count mismatch");
}

double BrownianTruncation::coefficient(std::size_t element, std::size_t mode,
                                       std::size_t noise) const {
  return coefficients_[(element * basis_.count() + mode) * noises_ + noise];
}

double BrownianTruncation::partial(std::size_t element, std::size_t noise, double tau) const {
  double s = 0.0;
  for (std::size_t i = 0; i < basis_.count(); ++i)
    s += coefficient(element, i, noise) * basis_.antiderivative(i, tau);
  return s;
}

std::vector<double> BrownianTruncation::path(double t) const {
  const double delta = basis_.element_length();
  const double horizon = delta * static_cast<double>(elements_);
  if (t < 0.0 || t > horizon * (1.0 + 1e-12)) throw ConfigError("reconstruct_path: t outside [0, K Delta]");
  t = std::min(t, horizon);
  std::size_t full = static_cast<std::size_t>(std::floor(t / delta));
  full = std::min(full, elements_);
  const double tau = t - static_cast<double>(full) * delta;

  std::vector<double> w(noises_, 0.0);
  for (std::size_t k = 0; k < noises_; ++k) {
    for (std::size_t j = 0; j < full; ++j) w[k] += partial(j, k, delta);
    if (full < elements_) w[k] += partial(full, k, tau);
  }
  return w;
}

std::vector<double> reconstruct_path(const BrownianTruncation& truncation, double t) {
  return truncation.path(t);
}

double truncated_path_variance(const TemporalBasis& basis, double t) {
  double v = 0.0;
  for (std::size_t l = 0; l < basis.count(); ++l) {
    const double m = basis.antiderivative(l, t);
    v += m * m;
  }
  return v;
}

}  // namespace spdemoments
