#pragma once

#include <variant>
#include <vector>

#include "frontier/convex.hpp"
#include "frontier/linalg.hpp"

namespace frontier {

/// {x >= 0, sum(x) == 1}.
struct Simplex {
  Eigen::Index dim = 0;
};

/// {x >= 0, sum(x) <= cap}.
struct ScaledSimplex {
  Eigen::Index dim = 0;
  double cap = 1.0;
};

/// {lower <= x <= upper, sum(x) + c == 1, cash_lower <= c <= cash_upper}.
/// The cash weight c is implicit: c = 1 - sum(x).
struct BoxSimplex {
  Vector lower;
  Vector upper;
  double cash_lower = 0.0;
  double cash_upper = 0.0;
};

/// {x >= 0, A x <= d} with A >= 0 and d > 0, so 0 is always feasible.
struct Polyhedron {
  Matrix a;
  Vector d;
};

using DomainSpec = std::variant<Simplex, ScaledSimplex, BoxSimplex, Polyhedron>;

Eigen::Index domain_dim(const DomainSpec& d);
/// Checks shapes and the documented sign conditions; throws ValidationError
/// or InfeasibleDomain (empty BoxSimplex).
void validate_domain(const DomainSpec& d);
bool domain_contains_origin(const DomainSpec& d);
bool domain_contains(const DomainSpec& d, const Vector& x, double tol = 1e-9);

/// Constraint-matrix form of the domain used by the dense solvers.
convex::Polytope to_polytope(const DomainSpec& d);
/// A strictly interior point (relative to the equality constraints).
Vector interior_point(const DomainSpec& d);

/// Euclidean projection onto the probability simplex (sort and threshold).
Vector project_simplex(const Vector& y);
/// Euclidean projection onto any DomainSpec.
Vector project_domain(const Vector& y, const DomainSpec& d);

struct SubproblemSolution {
  Vector x;
  double objective_value = 0.0;
  int iterations = 0;
  /// Scaled first-order optimality residual.
  double residual = 0.0;
  bool closed_form = false;
  /// Polytope inequality rows active at x (reusable as a warm start).
  std::vector<int> active_set;
};

/// Starting point for a nearby solve: a feasible x and the rows it holds tight.
struct WarmStart {
  Vector x;
  std::vector<int> active;
};

WarmStart warm_start_from(const SubproblemSolution& s);

/// argmin <a, x> + w (x - x_ref)^T S (x - x_ref) over D.
SubproblemSolution solve_linear_plus_quadratic(const Vector& a, double w, const SpdMatrix& s, const Vector& x_ref,
                                               const DomainSpec& d, const WarmStart* warm = nullptr);

/// argmin x^T S x over D. On the simplex the closed form S^-1 e / <e, S^-1 e>
/// is returned whenever S^-1 e >= 0, unless `force_numeric`.
SubproblemSolution min_quadratic_over_domain(const SpdMatrix& s, const DomainSpec& d, bool force_numeric = false);

/// argmin <a, x> over D; ties go to the lowest-index vertex.
SubproblemSolution nominal_minimize(const Vector& a, const DomainSpec& d);

/// Generic smooth convex minimization over D.
SubproblemSolution minimize_over_domain(const convex::Objective& f, const DomainSpec& d,
                                        const WarmStart* warm = nullptr);

}  // namespace frontier
