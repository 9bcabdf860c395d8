#include <gtest/gtest.h>

#include <cmath>

#include "spdemoments/crank_nicolson.hpp"
#include "spdemoments/error.hpp"
#include "spdemoments/harness.hpp"
#include "spdemoments/wce.hpp"

using namespace spdemoments;

namespace {

Coefficient k(double v) {
  return [v](double) { return v; };
}

SpdeProblem simple(double a, double c, double sigma, double nu) {
  return {"test", k(a), k(0.0), k(c), {{k(sigma), k(nu)}}, [](double x) { return std::cos(x); }};
}

// ||E u^2(T)|| / ||u0^2|| on a problem whose moment is a multiple of cos^2 x.
double growth(const DiscreteProblem& p, const Eigen::VectorXd& field) {
  return field_norms(field).l2 / field_norms(p.initial().array().square().matrix()).l2;
}

double truncated_exp(double z, int order) {
  double s = 0.0, term = 1.0;
  for (int j = 0; j <= order; ++j) {
    s += term;
    term *= z / (j + 1);
  }
  return s;
}

}  // namespace

TEST(Propagator, ZeroNoiseIsHeatDecay) {
  const DiscreteProblem p(simple(0.02, 0.0, 0.0, 0.0), FourierGrid(12));
  const auto sol = solve_propagator(p, p.initial(), 2, 1, 0.1, 0.01);
  ASSERT_EQ(sol.end_fields.size(), sol.indices.size());
  const double cn = std::pow((1 - 0.02 * 0.005) / (1 + 0.02 * 0.005), 10);
  EXPECT_LT((sol.end_fields[0].col(0) - cn * p.initial()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((sol.end_fields[0].col(0) - std::exp(-0.002) * p.initial()).cwiseAbs().maxCoeff(), 1e-9);
  for (std::size_t i = 1; i < sol.indices.size(); ++i) EXPECT_EQ(sol.end_fields[i].cwiseAbs().maxCoeff(), 0.0);
}

TEST(Propagator, ReactionOnlyByHand) {
  const double nu = 1.0, d = 0.1;
  const DiscreteProblem p(simple(0.0, 0.0, 0.0, nu), FourierGrid(8));
  const auto sol = solve_propagator(p, p.initial(), 3, 1, d, d / 10);
  EXPECT_LT((sol.end_fields[0].col(0) - p.initial()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((sol.end_fields[1].col(0) - nu * std::sqrt(d) * p.initial()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((sol.end_fields[2].col(0) - nu * nu * d * p.initial()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Propagator, SeveralInitialConditionsAtOnce) {
  const DiscreteProblem p(build_example("noncommutative", {}), FourierGrid(10));
  Eigen::MatrixXd init(10, 2);
  init.col(0) = p.initial();
  init.col(1) = p.grid().basis().col(3);
  const auto both = solve_propagator(p, init, 2, 2, 0.1, 0.01);
  const auto second = solve_propagator(p, init.col(1), 2, 2, 0.1, 0.01);
  for (std::size_t i = 0; i < both.indices.size(); ++i)
    EXPECT_LT((both.end_fields[i].col(1) - second.end_fields[i].col(0)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(WceSecondMoments, ReactionOnlyFactor) {
  const DiscreteProblem p(simple(0.0, 0.0, 0.0, 1.0), FourierGrid(8));
  for (int order = 0; order <= 4; ++order) {
    const auto run = wce_second_moments(p, {order, 1, 0.1, 1e-4, 1});
    // exact through N = 2; beyond that the trapezoid sees curved forcing
    EXPECT_NEAR(growth(p, run.moments.final_snapshot().field), truncated_exp(0.1, order), order <= 2 ? 1e-12 : 1e-9)
        << order;
  }
  const auto two = wce_second_moments(p, {2, 1, 0.1, 1e-4, 1});
  EXPECT_NEAR(growth(p, two.moments.final_snapshot().field), 1.105, 1e-12);
}

TEST(WceSecondMoments, ReactionOnlyErrorShrinksWithOrder) {
  const DiscreteProblem p(simple(0.0, 0.0, 0.0, 1.0), FourierGrid(8));
  double prev = 1.0;
  for (int order = 1; order <= 3; ++order) {
    const auto run = wce_second_moments(p, {order, 1, 0.1, 1e-3, 1});
    const double err = std::abs(growth(p, run.moments.final_snapshot().field) - std::exp(0.1));
    EXPECT_LT(err, prev) << order;
    prev = err;
  }
}

TEST(WceSecondMoments, MultiElementReaction) {
  const DiscreteProblem p(simple(0.0, 0.0, 0.0, 1.0), FourierGrid(8));
  const auto run = wce_second_moments(p, {2, 1, 0.1, 0.01, 5});
  ASSERT_EQ(run.moments.snapshots.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(run.moments.snapshots[i].time, 0.1 * (i + 1), 1e-14);
    EXPECT_NEAR(growth(p, run.moments.snapshots[i].field), std::pow(1.105, i + 1), 1e-12);
  }
}

TEST(WceSecondMoments, ZeroNoiseIsDeterministicSquare) {
  const double eps = 0.02, d = 0.1, dt = 0.01;
  const DiscreteProblem p(simple(eps, 0.0, 0.0, 0.0), FourierGrid(12));
  const auto run = wce_second_moments(p, {2, 1, d, dt, 10});
  const Eigen::VectorXd u0sq = p.initial().array().square();
  for (std::size_t i = 0; i < 10; ++i) {
    const double t = d * (i + 1);
    const double cn = std::pow((1 - eps * dt / 2) / (1 + eps * dt / 2), 2 * 10 * (i + 1));
    EXPECT_LT((run.moments.snapshots[i].field - cn * u0sq).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((run.moments.snapshots[i].field - std::exp(-2 * eps * t) * u0sq).cwiseAbs().maxCoeff(), 1e-8);
  }
}

// For K = 1 the covariance route must equal sum_alpha phi_alpha(Delta; u0)^2 / alpha!.
TEST(WceSecondMoments, OneElementEqualsDirectChaosSum) {
  for (const char* name : {"single", "commutative", "noncommutative"}) {
    const DiscreteProblem p(build_example(name, {}), FourierGrid(12));
    const auto sol = solve_propagator(p, p.initial(), 2, 2, 0.1, 0.01);
    Eigen::VectorXd direct = Eigen::VectorXd::Zero(12);
    for (std::size_t i = 0; i < sol.indices.size(); ++i)
      direct += sol.end_fields[i].col(0).array().square().matrix() / sol.indices[i].factorial();
    const auto run = wce_second_moments(p, {2, 2, 0.1, 0.01, 1});
    EXPECT_LT((run.moments.final_snapshot().field - direct).cwiseAbs().maxCoeff(), 1e-10) << name;
  }
}

TEST(WceSecondMoments, DoublingGridLeavesMomentUnchanged) {
  const auto problem = build_example("single", {});
  const DiscreteProblem coarse(problem, FourierGrid(20)), fine(problem, FourierGrid(40));
  const auto a = wce_second_moments(coarse, {1, 1, 0.1, 0.01, 5}).moments.final_snapshot().field;
  const auto b = wce_second_moments(fine, {1, 1, 0.1, 0.01, 5}).moments.final_snapshot().field;
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(a[i], b[2 * i], 1e-8) << i;
}

TEST(WceSecondMoments, CovarianceHealthOnExamples) {
  for (const char* name : {"single", "commutative", "noncommutative"}) {
    const DiscreteProblem p(build_example(name, {}), FourierGrid(16));
    const auto run = wce_second_moments(p, {2, 1, 0.1, 0.01, 10});
    EXPECT_TRUE(run.moments.health.symmetric()) << name << " " << run.moments.health.max_asymmetry;
    EXPECT_TRUE(run.moments.health.positive_semidefinite()) << name << " " << run.moments.health.worst_eigen_ratio;
    const Eigen::MatrixXd& q = run.moments.final_covariance.entries;
    EXPECT_LE((q - q.transpose()).cwiseAbs().maxCoeff(), 1e-10 * q.cwiseAbs().maxCoeff());
    EXPECT_NEAR(run.moments.final_covariance.time, 1.0, 1e-14);
  }
}

TEST(WceSecondMoments, TraceMatchesField) {
  const DiscreteProblem p(build_example("single", {}), FourierGrid(16));
  const auto run = wce_second_moments(p, {1, 1, 0.1, 0.01, 3});
  for (const auto& s : run.moments.snapshots)
    EXPECT_NEAR(s.trace, p.grid().spacing() * s.field.sum(), 1e-12);
}

TEST(WceSecondMoments, SolverFailureNamesAlpha) {
  const DiscreteProblem p(simple(0.0, 20.0, 0.0, 0.0), FourierGrid(8));
  try {
    wce_second_moments(p, {1, 1, 0.1, 0.1, 1});
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("propagator for alpha = "), std::string::npos) << e.what();
  }
}

TEST(WceSecondMoments, CoercivityWarningOrRefusal) {
  const DiscreteProblem p(simple(0.0, 0.0, 0.0, 1.0), FourierGrid(8));
  const auto run = wce_second_moments(p, {1, 1, 0.1, 0.01, 1});
  ASSERT_FALSE(run.warnings.empty());
  WceOptions strict;
  strict.require_coercive = true;
  EXPECT_THROW(wce_second_moments(p, {1, 1, 0.1, 0.01, 1}, strict), ConfigError);
  const DiscreteProblem ok(build_example("single", {}), FourierGrid(8));
  EXPECT_NO_THROW(wce_second_moments(ok, {1, 1, 0.1, 0.01, 1}, strict));
}

TEST(WceSecondMoments, RejectsBadParameters) {
  const DiscreteProblem p(build_example("single", {}), FourierGrid(8));
  EXPECT_THROW(wce_second_moments(p, {-1, 1, 0.1, 0.01, 1}), ConfigError);
  EXPECT_THROW(wce_second_moments(p, {1, 1, 0.1, 0.01, 0}), ConfigError);
  EXPECT_THROW(wce_second_moments(p, {1, 1, 0.1, 0.03, 1}), ConfigError);
}
