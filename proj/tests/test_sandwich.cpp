#include <gtest/gtest.h>

#include <cmath>

#include "frontier/errors.hpp"
#include "frontier/sandwich.hpp"

using namespace frontier;

namespace {

SandwichConfig small_config() {
  SandwichConfig cfg;
  cfg.m = 8;
  cfg.n = 40;
  cfg.trials = 6;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST(RandomPolyhedron, SameKeyGivesSameMatrix) {
  const SandwichConfig cfg = small_config();
  EXPECT_EQ(sample_random_polyhedron(cfg, 3).a, sample_random_polyhedron(cfg, 3).a);
  EXPECT_NE(sample_random_polyhedron(cfg, 3).a, sample_random_polyhedron(cfg, 4).a);
  EXPECT_EQ(sample_random_polyhedron(cfg, 0).d, Vector::Constant(cfg.m, cfg.d_bar));
}

TEST(RandomPolyhedron, EntriesStayInTheSupport) {
  SandwichConfig cfg = small_config();
  cfg.bound_b = 2.5;
  for (int trial = 0; trial < 5; ++trial) {
    const Polyhedron p = sample_random_polyhedron(cfg, trial);
    EXPECT_GE(p.a.minCoeff(), 0.0);
    EXPECT_LE(p.a.maxCoeff(), cfg.bound_b);
  }
}

TEST(RandomPolyhedron, SampleMeanNearHalfTheBound) {
  SandwichConfig cfg;
  cfg.m = 50;
  cfg.n = 200;
  cfg.bound_b = 1.0;
  for (int trial = 0; trial < 3; ++trial) {
    const Polyhedron p = sample_random_polyhedron(cfg, trial);
    const double cells = static_cast<double>(cfg.m * cfg.n);
    EXPECT_NEAR(p.a.mean(), 0.5 * cfg.bound_b, 3.0 * cfg.bound_b / std::sqrt(12.0 * cells));
  }
}

TEST(SandwichFactors, Examples) {
  SandwichConfig cfg;
  const SandwichFactors f = sandwich_factors(cfg);
  EXPECT_NEAR(f.epsilon, 2.0 * std::sqrt(std::log(50.0) / 200.0), 1e-15);
  EXPECT_NEAR(f.epsilon, 0.2797, 1e-4);
  EXPECT_NEAR(f.kappa, 2.777, 1e-3);
  EXPECT_NEAR(f.kappa, 1.0 / (0.5 * (1.0 - f.epsilon)), 1e-14);
  EXPECT_EQ(f.inner_cap, 1.0);

  cfg.m = 1;
  EXPECT_EQ(sandwich_factors(cfg).epsilon, 0.0);
  EXPECT_EQ(sandwich_factors(cfg).kappa, cfg.bound_b / cfg.mu);
}

TEST(SandwichFactors, EpsilonTooLargeReportsMinimalN) {
  SandwichConfig cfg;
  cfg.m = 100;
  cfg.n = 10;
  try {
    sandwich_factors(cfg);
    FAIL() << "expected EpsilonTooLarge";
  } catch (const EpsilonTooLarge& e) {
    EXPECT_NEAR(e.epsilon(), 1.357, 1e-3);
    const long n = e.minimal_n();
    cfg.n = n;
    EXPECT_LT(sandwich_factors(cfg).epsilon, 1.0);
    cfg.n = n - 1;
    EXPECT_THROW(sandwich_factors(cfg), EpsilonTooLarge);
  }
}

TEST(SandwichConfig, Validation) {
  SandwichConfig cfg = small_config();
  cfg.trials = 0;
  EXPECT_THROW(validate_sandwich_config(cfg), ValidationError);
  cfg = small_config();
  cfg.alphas = {0.5, 0.1};
  EXPECT_THROW(validate_sandwich_config(cfg), ValidationError);
  cfg = small_config();
  cfg.mu = 0.0;
  EXPECT_THROW(validate_sandwich_config(cfg), ValidationError);
}

TEST(SandwichExperiment, InnerSimplexInjectionOrdersTrivially) {
  const SandwichConfig cfg = small_config();
  const SandwichObjective obj = sandwich_objective(cfg);
  Polyhedron inner;
  inner.a = Matrix::Constant(1, cfg.n, cfg.bound_b);
  inner.d = Vector::Constant(1, cfg.d_bar);
  for (const SandwichAlphaResult& r : compare_with_simplices(cfg, obj.a0, obj.sigma, inner)) {
    EXPECT_TRUE(r.ordering_holds) << "alpha " << r.alpha;
    EXPECT_NEAR(r.r_inner, r.r_poly, kOrderingSlack) << "alpha " << r.alpha;
    EXPECT_LE(r.r_poly, r.r_outer);
  }
}

TEST(SandwichExperiment, InnerContainmentFollowsFromTheSupport) {
  const SandwichConfig cfg = small_config();
  const SandwichObjective obj = sandwich_objective(cfg);
  for (const SandwichTrial& t : run_sandwich_experiment(cfg, obj.a0, obj.sigma)) {
    EXPECT_TRUE(t.inner_contained);
    EXPECT_FALSE(t.error.has_value());
    EXPECT_GE(t.max_total, cfg.d_bar / cfg.bound_b - 1e-12);
  }
}

TEST(SandwichExperiment, ContainmentImpliesOrdering) {
  const SandwichConfig cfg = small_config();
  const SandwichObjective obj = sandwich_objective(cfg);
  const std::vector<SandwichTrial> trials = run_sandwich_experiment(cfg, obj.a0, obj.sigma);
  ASSERT_EQ(trials.size(), static_cast<std::size_t>(cfg.trials));
  for (const SandwichTrial& t : trials) {
    ASSERT_EQ(t.per_alpha.size(), cfg.alphas.size());
    if (t.containment()) EXPECT_TRUE(t.ordering_holds()) << "trial " << t.trial_index;
    for (const SandwichAlphaResult& r : t.per_alpha) {
      // alpha_eval = alpha keeps the comparison a plain inclusion of feasible sets.
      EXPECT_LE(r.r_inner, r.r_outer + kOrderingSlack);
    }
  }
  const SandwichSummary s = summarize(cfg, trials);
  EXPECT_EQ(s.trials, cfg.trials);
  EXPECT_EQ(s.containment_violations, 0);
}

TEST(SandwichExperiment, ThreadCountDoesNotChangeRecords) {
  const SandwichConfig cfg = small_config();
  const SandwichObjective obj = sandwich_objective(cfg);
  const std::vector<SandwichTrial> serial = run_sandwich_experiment(cfg, obj.a0, obj.sigma, 1);
  const std::vector<SandwichTrial> parallel = run_sandwich_experiment(cfg, obj.a0, obj.sigma, 3);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].trial_index, static_cast<int>(i));
    EXPECT_EQ(parallel[i].trial_index, static_cast<int>(i));
    EXPECT_EQ(serial[i].max_total, parallel[i].max_total);
    for (std::size_t k = 0; k < serial[i].per_alpha.size(); ++k) {
      EXPECT_EQ(serial[i].per_alpha[k].r_poly, parallel[i].per_alpha[k].r_poly);
    }
  }
}

TEST(SandwichExperiment, RejectsMismatchedObjective) {
  const SandwichConfig cfg = small_config();
  const SandwichObjective obj = sandwich_objective(cfg);
  EXPECT_THROW(run_sandwich_experiment(cfg, Vector::Zero(cfg.n + 1), obj.sigma), DimensionMismatch);
}

TEST(SandwichSummary, HoeffdingFloor) {
  SandwichConfig cfg;
  std::vector<SandwichTrial> trials(200);
  const SandwichSummary s = summarize(cfg, trials);
  EXPECT_NEAR(s.hoeffding_floor, 1.0 - 1.0 / 50.0 - 2.0 * std::sqrt(std::log(20.0) / 400.0), 1e-15);
  EXPECT_EQ(s.ordering, 0);
}
