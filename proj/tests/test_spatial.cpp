#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "spdemoments/error.hpp"
#include "spdemoments/harness.hpp"
#include "spdemoments/spatial.hpp"

using namespace spdemoments;

namespace {

template <typename F>
Eigen::VectorXd on(const FourierGrid& g, F f) {
  return g.points().unaryExpr(f);
}

Coefficient k(double v) {
  return [v](double) { return v; };
}

SpdeProblem simple(double a, double b, double c, double sigma, double nu) {
  return {"test", k(a), k(b), k(c), {{k(sigma), k(nu)}}, [](double x) { return std::cos(x); }};
}

}  // namespace

TEST(FourierGrid, Construction) {
  const FourierGrid g(20);
  EXPECT_EQ(g.size(), 20u);
  EXPECT_NEAR(g.spacing(), 2 * std::numbers::pi / 20, 1e-15);
  EXPECT_NEAR(g.points()[3], 3 * g.spacing(), 1e-15);
  EXPECT_THROW(FourierGrid(7), ConfigError);
  EXPECT_THROW(FourierGrid(66), ConfigError);
}

TEST(SpectralDerivative, SpecExamples) {
  const FourierGrid g(20);
  const Eigen::VectorXd d1 = spectral_derivative(g, on(g, [](double x) { return std::cos(x); }), 1);
  EXPECT_LT((d1 - on(g, [](double x) { return -std::sin(x); })).cwiseAbs().maxCoeff(), 1e-12);

  const Eigen::VectorXd one = Eigen::VectorXd::Constant(20, 2.5);
  EXPECT_LT(spectral_derivative(g, one, 1).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(spectral_derivative(g, one, 2).cwiseAbs().maxCoeff(), 1e-12);

  const Eigen::VectorXd d2 = spectral_derivative(g, on(g, [](double x) { return std::cos(3 * x); }), 2);
  EXPECT_LT((d2 - on(g, [](double x) { return -9 * std::cos(3 * x); })).cwiseAbs().maxCoeff(), 1e-12);

  EXPECT_THROW(spectral_derivative(g, one, 3), ConfigError);
}

TEST(SpectralDerivative, ExactBelowNyquistAndNyquistZeroed) {
  const FourierGrid g(16);
  for (int j = 1; j < 8; ++j) {
    const Eigen::VectorXd s = on(g, [j](double x) { return std::sin(j * x); });
    const Eigen::VectorXd ds = on(g, [j](double x) { return j * std::cos(j * x); });
    EXPECT_LT((spectral_derivative(g, s, 1) - ds).cwiseAbs().maxCoeff(), 1e-11) << j;
    const Eigen::VectorXd dds = on(g, [j](double x) { return -j * j * std::sin(j * x); });
    EXPECT_LT((spectral_derivative(g, s, 2) - dds).cwiseAbs().maxCoeff(), 1e-10) << j;
  }
  const Eigen::VectorXd nyq = on(g, [](double x) { return std::cos(8 * x); });
  EXPECT_LT(spectral_derivative(g, nyq, 1).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SpectralDerivative, CommutesWithGridShift) {
  const FourierGrid g(24);
  const Eigen::VectorXd v = on(g, [](double x) { return std::cos(2 * x) + 0.3 * std::sin(5 * x); });
  Eigen::VectorXd shifted(24);
  for (int i = 0; i < 24; ++i) shifted[i] = v[(i + 5) % 24];
  for (int order : {1, 2}) {
    const Eigen::VectorXd a = spectral_derivative(g, shifted, order);
    const Eigen::VectorXd dv = spectral_derivative(g, v, order);
    Eigen::VectorXd b(24);
    for (int i = 0; i < 24; ++i) b[i] = dv[(i + 5) % 24];
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(FourierGrid, BasisIsDiscretelyOrthonormal) {
  for (std::size_t m : {2u, 8u, 20u, 30u}) {
    const FourierGrid g(m);
    const Eigen::MatrixXd gram = g.spacing() * g.basis().transpose() * g.basis();
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-13) << m;
  }
}

TEST(FourierGrid, InnerProductExactForTrigPolynomials) {
  const FourierGrid g(20);
  // cos^2(2x) integrates to pi; sin(3x) sin(x) cos(2x) to pi/2 by product-to-sum
  EXPECT_NEAR(g.inner_product(on(g, [](double x) { return std::cos(2 * x); }), on(g, [](double x) { return std::cos(2 * x); })),
              std::numbers::pi, 1e-12);
  EXPECT_NEAR(g.inner_product(on(g, [](double x) { return std::sin(3 * x); }),
                              on(g, [](double x) { return std::sin(x) * std::cos(2 * x); })),
              std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(g.inner_product(on(g, [](double x) { return std::cos(9 * x); }), on(g, [](double x) { return std::cos(4 * x); })),
              0.0, 1e-12);
}

TEST(Operators, ApplyLExamples) {
  const FourierGrid g(20);
  const DiscreteProblem p(build_example("single", {}), g);
  const Eigen::VectorXd got = apply_L(p, on(g, [](double x) { return std::cos(x); }));
  const Eigen::VectorXd want = on(g, [](double x) { return -0.145 * std::cos(x) - 0.1 * std::sin(x) * std::sin(x); });
  EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12);

  const DiscreteProblem zero(simple(0, 0, 0, 0, 0), g);
  EXPECT_EQ(apply_L(zero, got).cwiseAbs().maxCoeff(), 0.0);

  const DiscreteProblem heat(simple(1, 0, 0, 0, 0), g);
  EXPECT_LT((apply_L(heat, on(g, [](double x) { return std::cos(x); })) + on(g, [](double x) { return std::cos(x); }))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(Operators, ApplyMExamples) {
  const FourierGrid g(20);
  const Eigen::VectorXd c = on(g, [](double x) { return std::cos(x); });
  const DiscreteProblem single(build_example("single", {}), g);
  EXPECT_LT((apply_M(single, 0, c) - on(g, [](double x) { return -0.5 * std::sin(x); })).cwiseAbs().maxCoeff(), 1e-12);

  const DiscreteProblem comm(build_example("commutative", {}), g);
  const Eigen::VectorXd v = on(g, [](double x) { return std::sin(2 * x) + 1.0; });
  EXPECT_LT((apply_M(comm, 1, v) - 0.2 * v).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((apply_M(comm, 0, c) - on(g, [](double x) { return -0.5 * std::cos(x) * std::sin(x); })).cwiseAbs().maxCoeff(),
            1e-12);
  EXPECT_THROW(apply_M(comm, 2, c), ConfigError);
}

TEST(Operators, StratonovichCorrection) {
  const FourierGrid g(20);
  const Eigen::VectorXd c = on(g, [](double x) { return std::cos(x); });
  const DiscreteProblem single(build_example("single", {}), g);
  // eps v'' + beta sin x v' on cos x
  const Eigen::VectorXd want = on(g, [](double x) { return -0.02 * std::cos(x) - 0.1 * std::sin(x) * std::sin(x); });
  EXPECT_LT((apply_L_stratonovich(single, c) - want).cwiseAbs().maxCoeff(), 1e-10);

  const DiscreteProblem quiet(simple(0.3, 0.1, 0.2, 0, 0), g);
  EXPECT_LT((apply_L_stratonovich(quiet, c) - apply_L(quiet, c)).cwiseAbs().maxCoeff(), 1e-15);

  const DiscreteProblem react(simple(0, 0, 0, 0, 0.7), g);
  EXPECT_LT((apply_L_stratonovich(react, c) + 0.5 * 0.49 * c).cwiseAbs().maxCoeff(), 1e-15);

  for (const char* name : {"single", "commutative", "noncommutative"}) {
    const DiscreteProblem p(build_example(name, {}), g);
    const Eigen::VectorXd v = on(g, [](double x) { return std::exp(std::sin(x)); });
    Eigen::VectorXd back = apply_L_stratonovich(p, v);
    for (std::size_t kk = 0; kk < p.noise_count(); ++kk) back += 0.5 * apply_M(p, kk, apply_M(p, kk, v));
    EXPECT_LT((back - apply_L(p, v)).cwiseAbs().maxCoeff(), 1e-12) << name;
  }
}

TEST(Diagnostics, Commutativity) {
  const FourierGrid g(20);
  const auto comm = check_commutativity(DiscreteProblem(build_example("commutative", {}), g));
  EXPECT_TRUE(comm.commutative);
  EXPECT_LT(comm.max_defect, 1e-10);
  const auto non = check_commutativity(DiscreteProblem(build_example("noncommutative", {}), g));
  EXPECT_FALSE(non.commutative);
  EXPECT_GT(non.max_defect, 1e-2);
  EXPECT_TRUE(check_commutativity(DiscreteProblem(build_example("single", {}), g)).commutative);
}

TEST(Diagnostics, Coercivity) {
  const FourierGrid g(20);
  EXPECT_NEAR(check_coercivity(DiscreteProblem(build_example("single", {}), g)), 0.04, 1e-14);
  EXPECT_EQ(check_coercivity(DiscreteProblem(simple(0, 0, 0, 0, 0), g)), 0.0);
  EXPECT_NEAR(check_coercivity(DiscreteProblem(build_example("commutative", {}), g)), 0.04, 1e-14);
}

TEST(Diagnostics, ExamplesArePeriodic) {
  const FourierGrid g(20);
  for (const char* name : {"single", "commutative", "noncommutative"})
    EXPECT_LT(periodicity_defect(build_example(name, {}), g), 1e-12) << name;
  SpdeProblem bad = simple(1, 0, 0, 0, 0);
  bad.b = [](double x) { return x; };
  EXPECT_GT(periodicity_defect(bad, g), 1.0);
}
