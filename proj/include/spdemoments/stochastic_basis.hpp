#pragma once

// Hermite polynomials, Cameron-Martin multi-indices and the piecewise
// cosine basis used to truncate Brownian motion on time elements.
//
// Indexing convention: noises k and temporal modes l are zero-based.
// Mode l = 0 is the constant mode 1/sqrt(Delta).

#include <cstddef>
#include <span>
#include <vector>

namespace spdemoments {

/// Probabilists' Hermite polynomial He_n(x), via He_{n+1} = x He_n - n He_{n-1}.
double hermite(int n, double x);

/// Hermite polynomial divided by sqrt(n!), computed with the scaled
/// recurrence so it stays finite for large n.
double normalized_hermite(int n, double x);

/// Cameron-Martin multi-index: a q x n matrix of nonnegative integers,
/// stored row-major over noises, entry (k, l) at flat position k * n + l.
class MultiIndex {
 public:
  MultiIndex(std::size_t noises, std::size_t modes);
  MultiIndex(std::size_t noises, std::size_t modes, std::vector<int> entries);

  std::size_t noises() const { return noises_; }
  std::size_t modes() const { return modes_; }
  int order() const { return order_; }

  int operator()(std::size_t k, std::size_t l) const { return entries_[k * modes_ + l]; }
  std::span<const int> entries() const { return entries_; }

  void set(std::size_t k, std::size_t l, int value);

  /// alpha!(k,l) with the (k, l) entry decremented and floored at zero.
  MultiIndex minus(std::size_t k, std::size_t l) const;

  /// alpha! = prod_{k,l} alpha_{k,l}!
  double factorial() const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.noises_ == b.noises_ && a.modes_ == b.modes_ && a.entries_ == b.entries_;
  }
  friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
    return a.entries_ < b.entries_;
  }

 private:
  std::size_t noises_;
  std::size_t modes_;
  std::vector<int> entries_;
  int order_ = 0;
};

/// Free-function form of MultiIndex::minus.
MultiIndex alpha_minus(const MultiIndex& alpha, std::size_t k, std::size_t l);

/// sqrt((alpha+beta)! / (alpha! beta!)), the Ito-Wick structure constant.
double wick_coefficient(const MultiIndex& alpha, const MultiIndex& beta);

/// n! as a double; exact below 21, log-gamma above.
double factorial(int n);

/// Binomial coefficient C(n, k) with overflow detection.
/// Throws ConfigError("truncation too large") when the value does not fit.
std::size_t checked_binomial(std::size_t n, std::size_t k);

/// The truncated index set {alpha : |alpha| <= N} over q noises and n modes,
/// in graded order: by |alpha|, then lexicographic on the flattened entries.
class MultiIndexSet {
 public:
  MultiIndexSet(int max_order, std::size_t modes, std::size_t noises);

  int max_order() const { return max_order_; }
  std::size_t modes() const { return modes_; }
  std::size_t noises() const { return noises_; }
  std::size_t size() const { return indices_.size(); }

  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  /// Position of alpha in the set; throws ConfigError if absent.
  std::size_t position(const MultiIndex& alpha) const;

 private:
  int max_order_;
  std::size_t modes_;
  std::size_t noises_;
  std::vector<MultiIndex> indices_;
};

MultiIndexSet enumerate_multiindices(int max_order, std::size_t modes, std::size_t noises);

/// Cosine CONS on [0, Delta]:
///   m_0(s) = 1/sqrt(Delta),  m_l(s) = sqrt(2/Delta) cos(pi l s / Delta).
class TemporalBasis {
 public:
  TemporalBasis(double element_length, std::size_t count);

  double element_length() const { return length_; }
  std::size_t count() const { return count_; }

  double value(std::size_t l, double s) const;
  /// M_l(t) = int_0^t m_l(s) ds.
  double antiderivative(std::size_t l, double t) const;

 private:
  double length_;
  std::size_t count_;
};

/// Free-function form of TemporalBasis::antiderivative.
double antiderivative_M(std::size_t l, double t, const TemporalBasis& basis);

/// Multi-element spectral truncation of a q-dimensional Brownian path.
/// coefficient(j, i, k) is xi_{i,k} on element j (zero-based).
class BrownianTruncation {
 public:
  BrownianTruncation(TemporalBasis basis, std::size_t elements, std::size_t noises,
                     std::vector<double> coefficients);

  const TemporalBasis& basis() const { return basis_; }
  std::size_t elements() const { return elements_; }
  std::size_t noises() const { return noises_; }
  double coefficient(std::size_t element, std::size_t mode, std::size_t noise) const;

  /// w^{(Delta,n)}(t) for every noise, 0 <= t <= K Delta.
  std::vector<double> path(double t) const;

 private:
  double partial(std::size_t element, std::size_t noise, double tau) const;

  TemporalBasis basis_;
  std::size_t elements_;
  std::size_t noises_;
  std::vector<double> coefficients_;
};

/// Free-function form of BrownianTruncation::path.
std::vector<double> reconstruct_path(const BrownianTruncation& truncation, double t);

/// Var[w^{(Delta,n)}(t)] = sum_l M_l(t)^2 for t inside one element.
double truncated_path_variance(const TemporalBasis& basis, double t);

}  // namespace spdemoments
