#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "frontier/errors.hpp"
#include "frontier/saddle.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace frontier;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double inf_dist(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Two rows that both bind at the optimum.
RcwucInstance pinned_instance() {
  Matrix c(2, 3);
  c << 1, 0, 0, 0, 1, 0;
  return {vec({-1.0, -0.5, 0.0}), c, vec({0.6, 0.5}), SpdMatrix::diagonal(vec({0.5, 0.5, 0.5}))};
}

/// One binding row, so the optimum slides along a curved face.
RcwucInstance sliding_instance() {
  Matrix c(1, 3);
  c << 1, 0.2, 0;
  Matrix s(3, 3);
  s << 1.0, 0.3, 0.0, 0.3, 0.8, 0.1, 0.0, 0.1, 0.6;
  return {vec({-1.0, -0.6, 0.0}), c, vec({0.5}), SpdMatrix(s)};
}

double norm_row(const RcwucInstance& inst, Eigen::Index i, const Vector& x, double beta) {
  return inst.C.row(i).dot(x) + beta * std::sqrt(x.dot(inst.sigma.entries() * x)) - inst.b(i);
}

double penalized_row(const RcwucInstance& inst, Eigen::Index i, const Vector& x, double alpha) {
  return inst.C.row(i).dot(x) + alpha * x.dot(inst.sigma.entries() * x) - inst.b(i);
}

Vector grid_norm_form(const RcwucInstance& inst, double beta, long steps) {
  const Eigen::Vector3d c0 = inst.c0;
  const Eigen::Matrix3d s = inst.sigma.entries();
  const Eigen::MatrixX3d c = inst.C;
  return oracle::simplex3_grid_minimize(
      [&](const Eigen::Vector3d& x) { return c0.dot(x); },
      [&](const Eigen::Vector3d& x) {
        const double root = std::sqrt(x.dot(s * x));
        for (Eigen::Index i = 0; i < c.rows(); ++i) {
          if (c.row(i).dot(x) + beta * root > inst.b(i)) return false;
        }
        return true;
      },
      steps);
}

}  // namespace

TEST(RcwucValidation, RejectsBadInstances) {
  RcwucInstance inst = pinned_instance();
  inst.b = vec({1.0});
  EXPECT_THROW(validate_rcwuc(inst), DimensionMismatch);
  inst = pinned_instance();
  inst.b = vec({-1.0, 0.5});
  EXPECT_THROW(validate_rcwuc(inst), ValidationError);
  EXPECT_NO_THROW(validate_rcwuc(pinned_instance()));
}

TEST(SaddleOracle, SlackRowsReduceToTheNominalVertex) {
  RcwucInstance inst = pinned_instance();
  inst.b = Vector::Constant(2, 1e9);
  const SaddleState s = saddle_oracle(inst, 1.0);
  EXPECT_EQ(s.lambda, Vector::Zero(2));
  EXPECT_EQ(s.x, vec({1, 0, 0}));
}

TEST(SaddleOracle, LinearCaseMatchesGridLp) {
  Matrix c(1, 2);
  c << 1.0, -0.5;
  const RcwucInstance inst{vec({-1.0, 0.2}), c, vec({0.1}), SpdMatrix::identity(2)};
  const SaddleState s = saddle_oracle(inst, 0.0);
  const auto g = [&](double t) {
    const double feasible = t - 0.5 * (1 - t) <= 0.1;
    return feasible ? -t + 0.2 * (1 - t) : 1e9;
  };
  const double t = oracle::grid_minimize(g, 0.0, 1.0).t;
  EXPECT_NEAR(s.x(0), t, 1e-7);
  EXPECT_NEAR(s.x(0) + s.x(1), 1.0, 1e-15);
  EXPECT_LE(s.gap_estimate, 1e-6);
}

TEST(SaddleOracle, MatchesPenalizedPrimalOnRandomInstances) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 12; ++trial) {
    const RcwucInstance inst = instances::random_rcwuc(rng, 2 + trial % 3, 1 + trial % 3, 2.0);
    for (double alpha : {0.1, 0.5, 1.0, 2.0}) {
      const SaddleState s = saddle_oracle(inst, alpha);
      const RcwucSolution p = solve_rcwuc_penalized(inst, alpha);
      EXPECT_LE(inf_dist(s.x, p.x), 1e-4) << "trial " << trial << " alpha " << alpha;
      EXPECT_GE(s.lambda.minCoeff(), 0.0);
    }
  }
}

TEST(SaddleOracle, OutputFeasibleAndComplementary) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 8; ++trial) {
    const RcwucInstance inst = instances::random_rcwuc(rng, 3, 2, 2.0);
    for (double alpha : {0.5, 2.0}) {
      const SaddleState s = saddle_oracle(inst, alpha);
      const double beta = beta_of_iterate(s.x, inst.sigma, alpha);
      for (Eigen::Index i = 0; i < inst.count(); ++i) {
        EXPECT_LE(norm_row(inst, i, s.x, beta), 1e-6);
        EXPECT_LE(s.lambda(i) * std::abs(penalized_row(inst, i, s.x, alpha)), 1e-6);
      }
    }
  }
}

TEST(SaddleOracle, NominalCostNondecreasingInAlpha) {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 6; ++trial) {
    const RcwucInstance inst = instances::random_rcwuc(rng, 4, 3, 2.0);
    double previous = -std::numeric_limits<double>::infinity();
    for (double alpha : {0.1, 0.25, 0.5, 1.0, 1.5, 2.0}) {
      const double cost = inst.c0.dot(saddle_oracle(inst, alpha).x);
      EXPECT_GE(cost, previous - 1e-8);
      previous = cost;
    }
  }
}

TEST(SaddleOracle, DivergenceGuard) {
  RcwucInstance inst = pinned_instance();
  SaddleOptions opts;
  opts.step_lambda = 1e7;
  opts.step_decay = 1.0;
  opts.iters = 100;
  // At this radius no simplex point satisfies the penalized rows.
  EXPECT_THROW(saddle_oracle(inst, 1e3, opts), DivergenceDetected);
  opts.step_decay = 0.0;
  EXPECT_THROW(saddle_oracle(inst, 1.0, opts), ValidationError);
}

TEST(RcwucDirect, ZeroBetaIsTheLp) {
  const RcwucInstance inst = pinned_instance();
  const FrontierPoint p = solve_rcwuc_direct(inst, 0.0);
  EXPECT_LE(inf_dist(p.x, vec({0.6, 0.4, 0.0})), 1e-12);
  EXPECT_DOUBLE_EQ(p.robustness, p.efficiency);
}

TEST(RcwucDirect, MatchesTriangleGrid) {
  for (const RcwucInstance& inst : {pinned_instance(), sliding_instance()}) {
    for (double beta : {0.1, 0.4}) {
      const RcwucSolution s = solve_rcwuc_norm_form(inst, beta);
      EXPECT_LE(s.residual, 1e-8);
      const Vector grid = grid_norm_form(inst, beta, 10000);
      ASSERT_EQ(grid.size(), 3);
      EXPECT_LE(inf_dist(s.x, grid), 5e-4) << "beta " << beta;
      EXPECT_LE(s.objective_value, inst.c0.dot(grid) + 1e-12);
    }
  }
}

TEST(RcwucDirect, InfeasiblePastTheThreshold) {
  const RcwucInstance inst = pinned_instance();
  EXPECT_NO_THROW(solve_rcwuc_direct(inst, 0.5));
  EXPECT_THROW(solve_rcwuc_direct(inst, 50.0), InfeasibleAtBeta);
  EXPECT_THROW(solve_rcwuc_direct(inst, -1.0), ValidationError);
}

TEST(RcwucDirect, ObjectiveRisesTowardTheThreshold) {
  const RcwucInstance inst = sliding_instance();
  double previous = -std::numeric_limits<double>::infinity();
  for (double beta : {0.0, 0.15, 0.3, 0.45, 0.6}) {
    const double cost = solve_rcwuc_direct(inst, beta).nominal_cost;
    EXPECT_GE(cost, previous - 1e-10);
    previous = cost;
  }
}

TEST(AlphaToBeta, Examples) {
  EXPECT_EQ(map_alpha_to_beta(pinned_instance(), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(beta_of_iterate(vec({0.5, 0.5}), SpdMatrix::diagonal(vec({0.5, 0.5})), 2.0), 1.0);
  EXPECT_THROW(beta_of_iterate(Vector::Zero(2), SpdMatrix::identity(2), 1.0), ZeroIterate);
}

TEST(AlphaToBeta, RoundTripWhenBothRowsBind) {
  const RcwucInstance inst = pinned_instance();
  for (double alpha : {0.2, 0.5, 1.0}) {
    const SaddleState s = saddle_oracle(inst, alpha);
    const double beta = beta_of_iterate(s.x, inst.sigma, alpha);
    EXPECT_LE(inf_dist(solve_rcwuc_direct(inst, beta).x, s.x), 1e-4) << "alpha " << alpha;
  }
}

TEST(AlphaToBeta, NormFormNeverCostsMore) {
  // x_SP is feasible for the norm form at the mapped beta.
  std::mt19937_64 rng(109);
  for (int trial = 0; trial < 8; ++trial) {
    const RcwucInstance inst = instances::random_rcwuc(rng, 2 + trial % 3, 1 + trial % 3, 2.0);
    for (double alpha : {0.2, 1.0, 2.0}) {
      const SaddleState s = saddle_oracle(inst, alpha);
      const double beta = beta_of_iterate(s.x, inst.sigma, alpha);
      EXPECT_LE(solve_rcwuc_direct(inst, beta).nominal_cost, inst.c0.dot(s.x) + 1e-9);
    }
  }
}

TEST(AlphaToBeta, NormFormDiffersWhenOneRowSlides) {
  // With a single binding row the two parameterizations meet at x_SP but their
  // optimality conditions differ, so the norm-form optimum moves away.
  const RcwucInstance inst = sliding_instance();
  const SaddleState s = saddle_oracle(inst, 1.0);
  const double beta = beta_of_iterate(s.x, inst.sigma, 1.0);
  EXPECT_LE(norm_row(inst, 0, s.x, beta), 1e-9);
  EXPECT_GT(inf_dist(solve_rcwuc_direct(inst, beta).x, s.x), 1e-3);
}
