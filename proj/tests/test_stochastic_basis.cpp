#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "spdemoments/error.hpp"
#include "spdemoments/stochastic_basis.hpp"

using namespace spdemoments;

namespace {

// Pascal's triangle, independent of checked_binomial.
double pascal(int n, int k) {
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(n + 1, 0.0));
  for (int i = 0; i <= n; ++i) {
    c[i][0] = 1.0;
    for (int j = 1; j <= i; ++j) c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
  }
  return c[n][k];
}

// Composite Simpson on [a, b] with m (even) panels.
template <typename F>
double simpson(F f, double a, double b, int m) {
  const double h = (b - a) / m;
  double s = f(a) + f(b);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST(Hermite, SpecValues) {
  EXPECT_DOUBLE_EQ(hermite(0, 3.7), 1.0);
  EXPECT_DOUBLE_EQ(hermite(2, 2.0), 3.0);
  EXPECT_NEAR(hermite(3, std::sqrt(3.0)), 0.0, 1e-14);
  for (double x : {-1.3, 0.0, 0.4, 2.5}) {
    EXPECT_NEAR(hermite(2, x), x * x - 1.0, 1e-13);
    EXPECT_NEAR(hermite(4, x), x * x * x * x - 6 * x * x + 3, 1e-12);
  }
  EXPECT_THROW(hermite(-1, 0.0), ConfigError);
}

TEST(Hermite, NormalizedMatchesScaledPolynomial) {
  for (int n = 0; n <= 12; ++n)
    for (double x : {-2.0, -0.3, 0.7, 1.9})
      EXPECT_NEAR(normalized_hermite(n, x), hermite(n, x) / std::sqrt(std::tgamma(n + 1.0)), 1e-10);
  EXPECT_TRUE(std::isfinite(normalized_hermite(300, 3.0)));
}

// (1/sqrt(2pi)) int He_m He_n e^{-x^2/2} dx = n! delta_mn, by plain Simpson on [-14, 14].
TEST(Hermite, Orthogonality) {
  for (int m = 0; m <= 8; ++m) {
    for (int n = 0; n <= 8; ++n) {
      auto f = [&](double x) { return hermite(m, x) * hermite(n, x) * std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); };
      const double got = simpson(f, -14.0, 14.0, 8000);
      const double want = m == n ? std::tgamma(n + 1.0) : 0.0;
      EXPECT_NEAR(got, want, 1e-10 * std::max(1.0, want)) << m << "," << n;
    }
  }
}

TEST(Factorial, ExactAndLogGamma) {
  EXPECT_EQ(factorial(0), 1.0);
  EXPECT_EQ(factorial(5), 120.0);
  EXPECT_EQ(factorial(20), 2432902008176640000.0);
  EXPECT_NEAR(factorial(25) / 1.5511210043330986e25, 1.0, 1e-12);
}

TEST(MultiIndexSet, SpecExamples) {
  const auto a = enumerate_multiindices(1, 1, 1);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].order(), 0);
  EXPECT_EQ(a[1](0, 0), 1);
  EXPECT_EQ(enumerate_multiindices(0, 5, 3).size(), 1u);
  EXPECT_EQ(enumerate_multiindices(2, 2, 1).size(), 6u);
}

TEST(MultiIndexSet, CardinalityIsBinomial) {
  for (int N = 0; N <= 4; ++N)
    for (std::size_t n = 1; n <= 5; ++n)
      for (std::size_t q = 1; n * q <= 10; ++q)
        EXPECT_EQ(static_cast<double>(enumerate_multiindices(N, n, q).size()),
                  pascal(N + static_cast<int>(n * q), N))
            << N << " " << n << " " << q;
}

TEST(MultiIndexSet, GradedLexOrderAndMembership) {
  const auto set = enumerate_multiindices(3, 2, 2);
  std::set<std::vector<int>> seen;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& a = set[i];
    int sum = 0;
    for (int e : a.entries()) {
      EXPECT_GE(e, 0);
      sum += e;
    }
    EXPECT_EQ(sum, a.order());
    EXPECT_LE(a.order(), 3);
    EXPECT_TRUE(seen.insert({a.entries().begin(), a.entries().end()}).second);
    EXPECT_EQ(set.position(a), i);
    if (i > 0) {
      const auto& b = set[i - 1];
      EXPECT_TRUE(b.order() < a.order() || (b.order() == a.order() && b < a));
    }
  }
  EXPECT_THROW(set.position(MultiIndex(2, 2, {4, 0, 0, 0})), ConfigError);
}

TEST(MultiIndexSet, TooLarge) {
  EXPECT_THROW(enumerate_multiindices(30, 30, 30), ConfigError);
  try {
    enumerate_multiindices(30, 30, 30);
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("truncation too large"), std::string::npos);
  }
}

TEST(AlphaMinus, SpecExamples) {
  EXPECT_EQ(alpha_minus(MultiIndex(1, 1, {2}), 0, 0), MultiIndex(1, 1, {1}));
  EXPECT_EQ(alpha_minus(MultiIndex(1, 1, {0}), 0, 0), MultiIndex(1, 1, {0}));
  EXPECT_EQ(alpha_minus(MultiIndex(2, 2, {1, 0, 0, 2}), 1, 1), MultiIndex(2, 2, {1, 0, 0, 1}));
}

TEST(WickCoefficient, SpecExamplesAndSymmetry) {
  const MultiIndex zero(1, 1), one(1, 1, {1}), two(1, 1, {2});
  EXPECT_DOUBLE_EQ(wick_coefficient(zero, two), 1.0);
  EXPECT_NEAR(wick_coefficient(one, one), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(wick_coefficient(two, one), std::sqrt(3.0), 1e-15);
  const MultiIndex a(2, 2, {1, 0, 2, 1}), b(2, 2, {0, 3, 1, 1});
  EXPECT_DOUBLE_EQ(wick_coefficient(a, b), wick_coefficient(b, a));
  // (a+b)! = 1*6*6*2 = 72, a! = 2, b! = 6
  EXPECT_NEAR(wick_coefficient(a, b), std::sqrt(6.0), 1e-14);
}

TEST(TemporalBasis, AntiderivativeExamples) {
  const double d = 0.37;
  const TemporalBasis basis(d, 4);
  EXPECT_NEAR(antiderivative_M(0, d, basis), std::sqrt(d), 1e-15);
  EXPECT_NEAR(antiderivative_M(1, d, basis), 0.0, 1e-15);
  for (std::size_t l = 0; l < 4; ++l) EXPECT_EQ(antiderivative_M(l, 0.0, basis), 0.0);
  // against quadrature of m_l
  for (std::size_t l = 0; l < 4; ++l)
    EXPECT_NEAR(basis.antiderivative(l, 0.21), simpson([&](double s) { return basis.value(l, s); }, 0.0, 0.21, 2000),
                1e-12);
}

TEST(TemporalBasis, Orthonormal) {
  const double d = 0.8;
  const TemporalBasis basis(d, 11);
  for (std::size_t i = 0; i <= 10; ++i)
    for (std::size_t j = 0; j <= 10; ++j) {
      const double got = simpson([&](double s) { return basis.value(i, s) * basis.value(j, s); }, 0.0, d, 20000);
      EXPECT_NEAR(got, i == j ? 1.0 : 0.0, 1e-12) << i << "," << j;
    }
  EXPECT_NEAR(basis.value(0, 0.3), 1.0 / std::sqrt(d), 1e-15);
  EXPECT_NEAR(basis.value(2, 0.3), std::sqrt(2.0 / d) * std::cos(2.0 * std::numbers::pi * 0.3 / d), 1e-15);
}

TEST(BrownianTruncation, PathExamples) {
  const double d = 0.25;
  BrownianTruncation zero(TemporalBasis(d, 3), 4, 2, std::vector<double>(4 * 3 * 2, 0.0));
  for (double t : {0.0, 0.1, 0.6, 1.0})
    for (double w : reconstruct_path(zero, t)) EXPECT_EQ(w, 0.0);

  BrownianTruncation one(TemporalBasis(d, 1), 1, 1, {1.5});
  EXPECT_NEAR(reconstruct_path(one, d)[0], 1.5 * std::sqrt(d), 1e-15);
}

TEST(BrownianTruncation, ContinuousAcrossElements) {
  const std::size_t K = 5, n = 4, q = 2;
  std::vector<double> xi(K * n * q);
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = std::sin(1.7 * static_cast<double>(i) + 0.3);
  const double d = 0.2;
  BrownianTruncation tr(TemporalBasis(d, n), K, q, xi);
  EXPECT_EQ(tr.path(0.0)[0], 0.0);
  for (std::size_t j = 1; j < K; ++j) {
    const double t = static_cast<double>(j) * d;
    const auto left = tr.path(t * (1 - 1e-14));
    const auto right = tr.path(t * (1 + 1e-14));
    for (std::size_t k = 0; k < q; ++k) EXPECT_NEAR(left[k], right[k], 1e-12);
  }
  // at element ends only mode 0 survives
  double w = 0.0;
  for (std::size_t j = 0; j < K; ++j) w += tr.coefficient(j, 0, 1) * std::sqrt(d);
  EXPECT_NEAR(tr.path(K * d)[1], w, 1e-12);
}

TEST(BrownianTruncation, VarianceApproachesT) {
  const double d = 1.0;
  EXPECT_NEAR(truncated_path_variance(TemporalBasis(d, 1), d), d, 1e-15);
  const double t = 0.37;
  double prev = 0.0;
  for (std::size_t n = 1; n <= 200; ++n) {
    const double v = truncated_path_variance(TemporalBasis(d, n), t);
    EXPECT_GE(v, prev - 1e-15);
    EXPECT_LE(v, t + 1e-12);
    prev = v;
  }
  EXPECT_NEAR(prev, t, 2e-3);
}
