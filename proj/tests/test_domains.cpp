#include <gtest/gtest.h>

#include <random>

#include "frontier/domains.hpp"
#include "frontier/errors.hpp"
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

// Random feasible point of a domain, used for optimality comparisons.
Vector random_feasible(std::mt19937_64& rng, const DomainSpec& d) {
  const Eigen::Index n = domain_dim(d);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (std::holds_alternative<Simplex>(d)) return oracle::random_simplex_point(rng, n);
  if (const auto* s = std::get_if<ScaledSimplex>(&d)) return s->cap * unif(rng) * oracle::random_simplex_point(rng, n);
  if (const auto* p = std::get_if<Polyhedron>(&d)) {
    Vector x = oracle::random_simplex_point(rng, n) * unif(rng) * 5.0;
    const double worst = (p->a * x).cwiseQuotient(p->d).maxCoeff();
    if (worst > 1.0) x /= worst;
    return x;
  }
  const auto& b = std::get<BoxSimplex>(d);
  for (;;) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = b.lower(i) + unif(rng) * (b.upper(i) - b.lower(i));
    const double c = 1.0 - x.sum();
    if (c >= b.cash_lower && c <= b.cash_upper) return x;
  }
}

BoxSimplex sample_box(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  BoxSimplex b;
  b.lower = Vector(n);
  b.upper = Vector(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    b.lower(i) = -0.2 * unif(rng);
    b.upper(i) = 0.5 + 0.4 * unif(rng);
  }
  b.cash_lower = -0.1;
  b.cash_upper = 0.2;
  return b;
}

}  // namespace

TEST(ProjectSimplex, Examples) {
  EXPECT_LE(inf_dist(project_simplex(vec({0.5, 0.8})), vec({0.35, 0.65})), 1e-15);
  EXPECT_EQ(project_simplex(vec({1, 0, 0})), vec({1, 0, 0}));
  EXPECT_EQ(project_simplex(vec({2, -1})), vec({1, 0}));
}

TEST(ProjectDomain, ScaledSimplexInteriorPointIsFixed) {
  EXPECT_EQ(project_domain(vec({0.5, 0.5}), ScaledSimplex{2, 2.0}), vec({0.5, 0.5}));
}

TEST(ProjectDomain, PolyhedronHalfspace) {
  Polyhedron p{Matrix::Ones(1, 2), Vector::Ones(1)};
  EXPECT_LE(inf_dist(project_domain(vec({1, 1}), p), vec({0.5, 0.5})), 1e-12);
}

TEST(ProjectDomain, BoxSimplexMatchesActiveSetEnumeration) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 3 + trial % 2;
    BoxSimplex b = sample_box(rng, n);
    b.upper = b.upper.cwiseMin(0.35);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = 0.4 + 0.5 * gauss(rng);
    const convex::Polytope p = to_polytope(b);
    const Vector expected = oracle::qp_enumerate(Matrix::Identity(n, n), -y, p.eq, p.eq_rhs, p.ineq, p.ineq_rhs);
    ASSERT_EQ(expected.size(), n);
    ASSERT_LE(inf_dist(project_domain(y, b), expected), 1e-10) << "trial " << trial;
  }
}

TEST(ProjectDomain, EmptyBoxSimplexDetected) {
  BoxSimplex b{Vector::Zero(2), Vector::Constant(2, 0.1), 0.0, 0.0};
  EXPECT_THROW(project_domain(Vector::Zero(2), b), InfeasibleDomain);
}

TEST(ProjectDomain, IdempotentAndOptimal) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    DomainSpec d;
    switch (trial % 4) {
      case 0:
        d = Simplex{n};
        break;
      case 1:
        d = ScaledSimplex{n, 0.5 + 2.0 * unif(rng)};
        break;
      case 2:
        d = sample_box(rng, n);
        break;
      default: {
        Matrix a(2, n);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = unif(rng);
        d = Polyhedron{a, Vector::Constant(2, 0.5 + unif(rng))};
      }
    }
    if (std::holds_alternative<BoxSimplex>(d) && n == 1) d = Simplex{n};
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = gauss(rng);
    const Vector x = project_domain(y, d);
    ASSERT_TRUE(domain_contains(d, x, 1e-12));
    ASSERT_LE(inf_dist(project_domain(x, d), x), 1e-12);
    const Vector z = random_feasible(rng, d);
    ASSERT_LE((x - y).norm(), (z - y).norm() + 1e-9);
  }
}

TEST(LinearPlusQuadratic, ZeroCostReturnsReference) {
  const Vector ref = vec({0.2, 0.3, 0.5});
  const auto sol = solve_linear_plus_quadratic(Vector::Zero(3), 3.0, SpdMatrix::identity(3), ref, Simplex{3});
  EXPECT_LE(inf_dist(sol.x, ref), 1e-14);
}

TEST(LinearPlusQuadratic, DominantPenaltyStaysAtReference) {
  const Vector ref = vec({0.2, 0.3, 0.5});
  const auto sol = solve_linear_plus_quadratic(vec({-1, 2, 0.5}), 1e12, SpdMatrix::identity(3), ref, Simplex{3});
  EXPECT_LE(inf_dist(sol.x, ref), 1e-6);
}

TEST(LinearPlusQuadratic, TwoDimensionalGridOracle) {
  const Vector a = vec({-1, 0});
  const auto sol = solve_linear_plus_quadratic(a, 1.0, SpdMatrix::identity(2), vec({0.5, 0.5}), Simplex{2});
  const auto g = [](double t) { return -t + (t - 0.5) * (t - 0.5) + (0.5 - t) * (0.5 - t); };
  const auto best = oracle::grid_minimize(g, 0.0, 1.0);
  EXPECT_NEAR(sol.x(0), best.t, 1e-7);
  EXPECT_NEAR(sol.x(0) + sol.x(1), 1.0, 1e-15);
  EXPECT_LE(sol.residual, 1e-10);
}

TEST(LinearPlusQuadratic, BeatsRandomFeasiblePoints) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index n = 6;
  const SpdMatrix s(oracle::random_spd(rng, n));
  Vector a(n);
  for (Eigen::Index i = 0; i < n; ++i) a(i) = 3.0 * gauss(rng);
  Matrix pa(3, n);
  for (Eigen::Index i = 0; i < pa.size(); ++i) pa.data()[i] = unif(rng);
  const std::vector<DomainSpec> domains{Simplex{n}, ScaledSimplex{n, 1.5}, sample_box(rng, n),
                                        Polyhedron{pa, Vector::Constant(3, 0.7)}};
  for (const DomainSpec& d : domains) {
    const Vector ref = random_feasible(rng, d);
    const auto sol = solve_linear_plus_quadratic(a, 0.3, s, ref, d);
    ASSERT_LE(sol.residual, 1e-10);
    ASSERT_TRUE(domain_contains(d, sol.x, 1e-12));
    auto obj = [&](const Vector& x) { return a.dot(x) + 0.3 * (x - ref).dot(s.entries() * (x - ref)); };
    for (int k = 0; k < 1000; ++k) ASSERT_LE(sol.objective_value, obj(random_feasible(rng, d)) + 1e-12);
  }
}

TEST(LinearPlusQuadratic, AgreesWithEnumerationOracle) {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 2 + trial % 3;
    const Matrix sm = oracle::random_spd(rng, n);
    Vector a(n);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = 4.0 * gauss(rng);
    const Vector ref = oracle::random_simplex_point(rng, n);
    const DomainSpec d = trial % 2 == 0 ? DomainSpec{Simplex{n}} : DomainSpec{ScaledSimplex{n, 0.8}};
    const auto sol = solve_linear_plus_quadratic(a, 0.7, SpdMatrix(sm), ref, d);
    const convex::Polytope p = to_polytope(d);
    const Vector expected =
        oracle::qp_enumerate(1.4 * sm, a - 1.4 * sm * ref, p.eq, p.eq_rhs, p.ineq, p.ineq_rhs);
    ASSERT_LE(inf_dist(sol.x, expected), 1e-10) << "trial " << trial;
  }
}

TEST(LinearPlusQuadratic, RejectsNonPositiveWeight) {
  EXPECT_THROW(solve_linear_plus_quadratic(Vector::Zero(2), 0.0, SpdMatrix::identity(2), Vector::Zero(2), Simplex{2}),
               ValidationError);
}

TEST(MinQuadratic, IdentityIsUniform) {
  const auto sol = min_quadratic_over_domain(SpdMatrix::identity(3), Simplex{3});
  EXPECT_TRUE(sol.closed_form);
  EXPECT_LE(inf_dist(sol.x, Vector::Constant(3, 1.0 / 3.0)), 1e-15);
}

TEST(MinQuadratic, DiagonalClosedForm) {
  const auto sol = min_quadratic_over_domain(SpdMatrix::diagonal(vec({1, 2})), Simplex{2});
  EXPECT_TRUE(sol.closed_form);
  EXPECT_LE(inf_dist(sol.x, vec({2.0 / 3.0, 1.0 / 3.0})), 1e-15);
}

TEST(MinQuadratic, SignMixedUsesNumericPathAndMatchesGrid) {
  Matrix s(2, 2);
  s << 1, 1.2, 1.2, 2;
  const SpdMatrix sigma(s);
  ASSERT_LT(solve_spd(sigma, Vector::Ones(2)).minCoeff(), 0.0);
  const auto sol = min_quadratic_over_domain(sigma, Simplex{2});
  EXPECT_FALSE(sol.closed_form);
  const auto g = [&](double t) {
    Vector x(2);
    x << t, 1 - t;
    return x.dot(s * x);
  };
  EXPECT_NEAR(sol.x(0), oracle::grid_minimize(g, 0.0, 1.0).t, 1e-7);
}

TEST(MinQuadratic, ClosedFormAgreesWithNumericPath) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 2 + trial % 8;
    Vector u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = unif(rng);
    const SpdMatrix s = SpdMatrix::diagonal(u);
    const auto closed = min_quadratic_over_domain(s, Simplex{n});
    const auto numeric = min_quadratic_over_domain(s, Simplex{n}, true);
    ASSERT_TRUE(closed.closed_form);
    ASSERT_LE(inf_dist(closed.x, numeric.x), 1e-8);
  }
}

TEST(NominalMinimize, LowestIndexVertexOnTies) {
  const auto sol = nominal_minimize(vec({0.3, -1, -1}), Simplex{3});
  EXPECT_EQ(sol.x, vec({0, 1, 0}));
  EXPECT_EQ(nominal_minimize(vec({0.3, 0.1}), ScaledSimplex{2, 3.0}).x, vec({0, 0}));
  EXPECT_EQ(nominal_minimize(vec({0.3, -0.1}), ScaledSimplex{2, 3.0}).x, vec({0, 3}));
}

TEST(NominalMinimize, BoxAndPolyhedronAgreeWithEnumeration) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 2 + trial % 3;
    Vector a(n);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = gauss(rng);
    DomainSpec d;
    if (trial % 2 == 0) {
      d = sample_box(rng, n);
    } else {
      Matrix pa(2, n);
      for (Eigen::Index i = 0; i < pa.size(); ++i) pa.data()[i] = unif(rng);
      d = Polyhedron{pa, Vector::Constant(2, 1.0)};
    }
    const auto sol = nominal_minimize(a, d);
    // A tiny ridge makes the enumeration oracle well posed without moving the LP optimum value.
    const convex::Polytope p = to_polytope(d);
    const Vector ref = oracle::qp_enumerate(1e-9 * Matrix::Identity(n, n), a, p.eq, p.eq_rhs, p.ineq, p.ineq_rhs);
    ASSERT_NEAR(a.dot(sol.x), a.dot(ref), 1e-8) << "trial " << trial;
    ASSERT_TRUE(domain_contains(d, sol.x, 1e-12));
  }
}
