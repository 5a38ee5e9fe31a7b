#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "frontier/errors.hpp"
#include "frontier/robust_frontier.hpp"
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

struct Instance {
  Vector a0;
  SpdMatrix sigma;
};

Instance random_instance(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vector a0(n);
  for (Eigen::Index i = 0; i < n; ++i) a0(i) = unif(rng);
  return {a0, SpdMatrix(oracle::random_spd(rng, n) / static_cast<double>(n))};
}

}  // namespace

TEST(WorstCase, RadiusZeroIsNominal) {
  const EllipsoidalSet u{SpdMatrix::identity(2), 0.0};
  EXPECT_EQ(worst_case_value(vec({0.3, 0.7}), vec({1, -2}), u), vec({1, -2}).dot(vec({0.3, 0.7})));
}

TEST(WorstCase, UnitVectorIdentityShape) {
  const EllipsoidalSet u{SpdMatrix::identity(2), 1.0};
  EXPECT_DOUBLE_EQ(worst_case_value(vec({1, 0}), vec({0, 0}), u), 1.0);
}

TEST(WorstCase, DominatesBoundarySamplesAndIsAttained) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + trial % 6;
    const Instance inst = random_instance(rng, n);
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = gauss(rng);
    const EllipsoidalSet u{inst.sigma, unif(rng)};
    const double value = worst_case_value(x, inst.a0, u);
    const Vector xi_star = worst_case_perturbation(x, u);
    EXPECT_NEAR((inst.a0 + xi_star).dot(x), value, 1e-12 * std::max(1.0, std::abs(value)));
    const Matrix& l = inst.sigma.factor();
    for (int k = 0; k < 10000; ++k) {
      Vector g(n);
      for (Eigen::Index i = 0; i < n; ++i) g(i) = gauss(rng);
      const Vector xi = u.radius * l * g / g.norm();
      ASSERT_LE((inst.a0 + xi).dot(x), value + 1e-12 * std::max(1.0, std::abs(value)));
    }
  }
}

TEST(EvaluatePoint, ZeroRadiusRobustnessEqualsEfficiency) {
  const Evaluation e = evaluate_point(vec({0.4, 0.6}), vec({1, 2}), SpdMatrix::identity(2), 0.0);
  EXPECT_EQ(e.efficiency, e.robustness);
  EXPECT_THROW(evaluate_point(vec({0.4, 0.6}), vec({1, 2, 3}), SpdMatrix::identity(2), 0.0), DimensionMismatch);
}

TEST(EvaluatePoint, NominalOptimizerAndOrdering) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 3 + trial % 5;
    const Instance inst = random_instance(rng, n);
    const double alpha = 1.5;
    const Vector x_e = nominal_minimize(inst.a0, Simplex{n}).x;
    const Vector x_r = min_quadratic_over_domain(inst.sigma, Simplex{n}).x;
    const Evaluation ee = evaluate_point(x_e, inst.a0, inst.sigma, alpha);
    const Evaluation er = evaluate_point(x_r, inst.a0, inst.sigma, 1e6);
    const Evaluation ee_big = evaluate_point(x_e, inst.a0, inst.sigma, 1e6);
    const Evaluation er_small = evaluate_point(x_r, inst.a0, inst.sigma, alpha);
    EXPECT_GE(ee.efficiency, er_small.efficiency - 1e-9);
    EXPECT_GE(er.robustness, ee_big.robustness - 1e-9);
    for (int k = 0; k < 1000; ++k) {
      const Vector z = oracle::random_simplex_point(rng, n);
      ASSERT_GE(ee.efficiency, -inst.a0.dot(z) - 1e-15);
    }
  }
}

TEST(ParetoExact, ZeroRadiusPicksLowestIndexVertex) {
  const EllipsoidalSet u{SpdMatrix::identity(3), 0.0};
  const FrontierPoint p = solve_pareto_exact(vec({0.2, -0.5, -0.5}), u, Simplex{3});
  EXPECT_EQ(p.x, vec({0, 1, 0}));
}

TEST(ParetoExact, HugeRadiusApproachesMinimumVariance) {
  const SpdMatrix sigma = SpdMatrix::diagonal(vec({1, 2, 0.5}));
  const FrontierPoint p = solve_pareto_exact(vec({0.3, -1, 0.8}), {sigma, 1e6}, Simplex{3});
  const Vector x_mv = min_quadratic_over_domain(sigma, Simplex{3}).x;
  EXPECT_LE(inf_dist(p.x, x_mv), 1e-5);
}

TEST(ParetoExact, TwoDimensionalGridOracle) {
  const FrontierPoint p = solve_pareto_exact(vec({-1, 0}), {SpdMatrix::identity(2), 1.0}, Simplex{2});
  const auto g = [](double t) { return -t + std::sqrt(t * t + (1 - t) * (1 - t)); };
  EXPECT_NEAR(p.x(0), oracle::grid_minimize(g, 0.0, 1.0).t, 1e-7);
  EXPECT_DOUBLE_EQ(p.efficiency, -p.nominal_cost);
  EXPECT_NEAR(p.robustness, -(p.nominal_cost + 1.0 * p.std_term), 1e-12);
}

TEST(ParetoExact, OtherDomainsBeatRandomFeasiblePoints) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 4;
    Instance inst = random_instance(rng, n);
    const double alpha = 0.2 + unif(rng);
    Matrix a(2, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = unif(rng);
    BoxSimplex box{Vector::Constant(n, -0.1), Vector::Constant(n, 0.6), -0.2, 0.3};
    const std::vector<DomainSpec> domains{ScaledSimplex{n, 2.0}, Polyhedron{a, Vector::Constant(2, 1.0)}, box};
    for (const DomainSpec& d : domains) {
      const SubproblemSolution s = solve_mean_std(inst.a0, inst.sigma, alpha, d);
      ASSERT_TRUE(domain_contains(d, s.x, 1e-12));
      ASSERT_LE(s.residual, 1e-9);
      auto obj = [&](const Vector& x) { return inst.a0.dot(x) + alpha * std::sqrt(quad_form(x, inst.sigma)); };
      const double best = obj(s.x);
      for (int k = 0; k < 1000; ++k) {
        Vector z = oracle::random_simplex_point(rng, n);
        if (const auto* p = std::get_if<Polyhedron>(&d)) {
          z *= unif(rng) * 4.0;
          const double worst = (p->a * z).cwiseQuotient(p->d).maxCoeff();
          if (worst > 1.0) z /= worst;
        } else if (std::holds_alternative<ScaledSimplex>(d)) {
          z *= 2.0 * unif(rng);
        } else if (!domain_contains(d, z, 0.0)) {
          continue;
        }
        ASSERT_LE(best, obj(z) + 1e-11);
      }
    }
  }
}

TEST(ParetoExact, NonnegativeMinimumOnScaledSimplexIsOrigin) {
  const FrontierPoint p = solve_pareto_exact(vec({0.5, 0.2}), {SpdMatrix::identity(2), 1.0}, ScaledSimplex{2, 3.0});
  EXPECT_EQ(p.x, Vector::Zero(2));
}

TEST(Sweep, SingleZeroRadiusIsNominalSolution) {
  const Vector a0 = vec({0.1, -0.4, 0.3});
  const FrontierSet f = sweep_exact_frontier(a0, SpdMatrix::identity(3), {0.0}, Simplex{3}, 0.0);
  ASSERT_EQ(f.points.size(), 1u);
  EXPECT_EQ(f.points[0].x, nominal_minimize(a0, Simplex{3}).x);
  EXPECT_EQ(f.provenance, Provenance::exact);
}

TEST(Sweep, RejectsNonIncreasingAlphas) {
  EXPECT_THROW(sweep_exact_frontier(vec({1, 2}), SpdMatrix::identity(2), {0.5, 0.5}, Simplex{2}, 0.5),
               ValidationError);
}

TEST(Sweep, ScalarizationMonotonicityAndDominance) {
  std::mt19937_64 rng(43);
  std::vector<double> alphas;
  for (int i = 0; i <= 20; ++i) alphas.push_back(0.05 * std::pow(1.35, i) - 0.05);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 3 + trial % 8;
    const Instance inst = random_instance(rng, n);
    const FrontierSet f = sweep_exact_frontier(inst.a0, inst.sigma, alphas, Simplex{n}, alphas.back());
    for (std::size_t k = 1; k < f.points.size(); ++k) {
      const FrontierPoint& lo = f.points[k - 1];
      const FrontierPoint& hi = f.points[k];
      ASSERT_GE(hi.nominal_cost, lo.nominal_cost - 1e-9) << "trial " << trial;
      ASSERT_LE(hi.std_term, lo.std_term + 1e-9) << "trial " << trial;
      ASSERT_GE(hi.robustness, lo.robustness - 1e-9) << "trial " << trial;
    }
    for (const auto& p : f.points) {
      for (const auto& q : f.points) {
        ASSERT_FALSE(q.efficiency > p.efficiency + 1e-9 && q.robustness > p.robustness + 1e-9);
      }
    }
  }
}

TEST(EpsilonConstraint, SlackBudgetReturnsMinimumVariance) {
  const SpdMatrix sigma = SpdMatrix::diagonal(vec({1, 2, 4}));
  const Vector a0 = vec({0.2, -0.1, 0.5});
  const Vector x_mv = min_quadratic_over_domain(sigma, Simplex{3}).x;
  const FrontierPoint p = solve_pe_epsilon_constraint(a0.dot(x_mv), a0, sigma, Simplex{3});
  EXPECT_LE(inf_dist(p.x, x_mv), 1e-15);
  EXPECT_TRUE(std::isinf(p.alpha));
}

TEST(EpsilonConstraint, TightBudgetPicksMinimumVarianceNominalOptimizer) {
  const SpdMatrix sigma = SpdMatrix::diagonal(vec({1, 3, 2}));
  const Vector a0 = vec({-1, -1, 0.5});
  const FrontierPoint p = solve_pe_epsilon_constraint(-1.0, a0, sigma, Simplex{3});
  EXPECT_LE(inf_dist(p.x, vec({0.75, 0.25, 0})), 1e-12);
  EXPECT_THROW(solve_pe_epsilon_constraint(-1.1, a0, sigma, Simplex{3}), InfeasibleBudget);
}

TEST(EpsilonConstraint, MidRangeGridOracle) {
  Matrix s(2, 2);
  s << 1, 0.3, 0.3, 2;
  const SpdMatrix sigma(s);
  const Vector a0 = vec({-1, 0.5});
  const double upsilon = -0.5;
  const FrontierPoint p = solve_pe_epsilon_constraint(upsilon, a0, sigma, Simplex{2});
  const auto g = [&](double t) {
    Vector x(2);
    x << t, 1 - t;
    return a0.dot(x) <= upsilon ? x.dot(s * x) : 1e300;
  };
  EXPECT_NEAR(p.x(0), oracle::grid_minimize(g, 0.0, 1.0).t, 1e-7);
}

TEST(EpsilonConstraint, CrossConsistentWithMeanStdSweep) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 3 + trial % 6;
    const Instance inst = random_instance(rng, n);
    const FrontierSet f = sweep_exact_frontier(inst.a0, inst.sigma, {0.05, 0.2, 0.5, 1.0, 3.0}, Simplex{n}, 3.0);
    for (const FrontierPoint& p : f.points) {
      const FrontierPoint q = solve_pe_epsilon_constraint(p.nominal_cost, inst.a0, inst.sigma, Simplex{n});
      ASSERT_NEAR(q.std_term, p.std_term, 1e-6) << "trial " << trial;
      if (std::isfinite(q.alpha) && (q.x.array() > 1e-9).count() >= 2) {
        EXPECT_NEAR(q.alpha, p.alpha, 1e-5 * std::max(1.0, p.alpha)) << "trial " << trial;
      }
    }
  }
}
