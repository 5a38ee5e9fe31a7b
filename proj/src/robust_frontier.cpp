#include "frontier/robust_frontier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "frontier/convex.hpp"
#include "frontier/errors.hpp"
#include "frontier/instrumentation.hpp"

namespace frontier {

namespace {

void check_instance(const Vector& a0, const SpdMatrix& sigma, const DomainSpec& d) {
  validate_domain(d);
  require_same_dim(a0.size(), domain_dim(d), "a0 vs domain");
  require_same_dim(sigma.dim(), domain_dim(d), "Sigma vs domain");
  require_finite(a0, "a0");
}

void check_radius(double alpha, const char* what) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ValidationError(std::string(what) + " must be finite and nonnegative");
  }
}

// True when some uniform mix of the cheapest coordinates has negative mean-std value.
bool negative_on_unit_simplex(const Vector& a0, const SpdMatrix& sigma, double alpha) {
  const Eigen::Index n = a0.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return a0(a) < a0(b); });
  for (Eigen::Index k = 1; k <= n; k *= 2) {
    Vector x = Vector::Zero(n);
    for (Eigen::Index i = 0; i < k; ++i) x(order[static_cast<std::size_t>(i)]) = 1.0 / static_cast<double>(k);
    if (a0.dot(x) + alpha * std::sqrt(quad_form(x, sigma)) < 0.0) return true;
  }
  return false;
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::exact:
      return "exact";
    case Provenance::ppm:
      return "ppm";
    case Provenance::extragradient:
      return "extragradient";
    case Provenance::saddle:
      return "saddle";
  }
  return "unknown";
}

double worst_case_value(const Vector& x, const Vector& a0, const EllipsoidalSet& u) {
  require_same_dim(x.size(), a0.size(), "worst_case_value");
  return a0.dot(x) + u.radius * std::sqrt(quad_form(x, u.shape));
}

Vector worst_case_perturbation(const Vector& x, const EllipsoidalSet& u) {
  const double root = std::sqrt(quad_form(x, u.shape));
  if (root == 0.0) return Vector::Zero(x.size());
  return (u.radius / root) * (u.shape * x);
}

Evaluation evaluate_point(const Vector& x, const Vector& a0, const SpdMatrix& sigma, double alpha_eval) {
  require_same_dim(x.size(), a0.size(), "evaluate_point");
  check_radius(alpha_eval, "alpha_eval");
  const double nominal = a0.dot(x);
  return {-nominal, -(nominal + alpha_eval * std::sqrt(quad_form(x, sigma)))};
}

FrontierPoint make_frontier_point(double alpha, const Vector& x, const Vector& a0, const SpdMatrix& sigma,
                                  double alpha_eval) {
  FrontierPoint p;
  p.alpha = alpha;
  p.x = x;
  p.nominal_cost = a0.dot(x);
  p.std_term = std::sqrt(quad_form(x, sigma));
  p.efficiency = -p.nominal_cost;
  p.robustness = -(p.nominal_cost + alpha_eval * p.std_term);
  p.upsilon = p.nominal_cost;
  return p;
}

SubproblemSolution solve_mean_std(const Vector& a0, const SpdMatrix& sigma, double alpha, const DomainSpec& d,
                                  const WarmStart* warm) {
  check_instance(a0, sigma, d);
  check_radius(alpha, "alpha");
  ++solve_counters().mean_std_solves;
  if (alpha == 0.0) return nominal_minimize(a0, d);

  const Eigen::Index n = domain_dim(d);
  const bool cone_is_orthant = std::holds_alternative<ScaledSimplex>(d) || std::holds_alternative<Polyhedron>(d);
  const bool certified = std::holds_alternative<Polyhedron>(d) && negative_on_unit_simplex(a0, sigma, alpha);
  if (cone_is_orthant && !certified) {
    // The objective is positively homogeneous and these domains generate the
    // nonnegative orthant, so 0 is optimal exactly when the unit-simplex
    // minimum is nonnegative.
    SubproblemSolution unit = solve_mean_std(a0, sigma, alpha, Simplex{n}, nullptr);
    if (unit.objective_value >= 0.0) {
      unit.x.setZero();
      unit.objective_value = 0.0;
      unit.active_set.clear();
      for (Eigen::Index j = 0; j < n; ++j) unit.active_set.push_back(static_cast<int>(j));
      return unit;
    }
    if (const auto* scaled = std::get_if<ScaledSimplex>(&d)) {
      unit.x *= scaled->cap;
      unit.objective_value *= scaled->cap;
      unit.active_set.clear();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (unit.x(j) == 0.0) unit.active_set.push_back(static_cast<int>(j));
      }
      unit.active_set.push_back(static_cast<int>(n));
      return unit;
    }
  }

  const bool smooth = domain_contains_origin(d);
  const convex::MeanStdObjective f(a0, alpha, sigma, smooth ? kStdSmoothing : 0.0);
  return minimize_over_domain(f, d, warm);
}

FrontierPoint solve_pareto_exact(const Vector& a0, const EllipsoidalSet& u, const DomainSpec& d,
                                 std::optional<double> alpha_eval) {
  const SubproblemSolution s = solve_mean_std(a0, u.shape, u.radius, d);
  return make_frontier_point(u.radius, s.x, a0, u.shape, alpha_eval.value_or(u.radius));
}

FrontierSet sweep_exact_frontier(const Vector& a0, const SpdMatrix& sigma, const std::vector<double>& alphas,
                                 const DomainSpec& d, double alpha_eval, bool continuation) {
  check_instance(a0, sigma, d);
  check_radius(alpha_eval, "alpha_eval");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    check_radius(alphas[i], "alpha");
    if (i > 0 && !(alphas[i] > alphas[i - 1])) throw ValidationError("alphas must be strictly increasing");
  }
  FrontierSet out;
  out.eval_radius = alpha_eval;
  out.provenance = Provenance::exact;
  std::optional<WarmStart> warm;
  for (double alpha : alphas) {
    const SubproblemSolution s = solve_mean_std(a0, sigma, alpha, d, warm ? &*warm : nullptr);
    // The alpha = 0 vertex is a poor start for the curved problems that follow.
    if (continuation && alpha > 0.0) warm = warm_start_from(s);
    out.points.push_back(make_frontier_point(alpha, s.x, a0, sigma, alpha_eval));
  }
  return out;
}

FrontierPoint solve_pe_epsilon_constraint(double upsilon, const Vector& a0, const SpdMatrix& sigma,
                                          const DomainSpec& d, double alpha_eval) {
  check_instance(a0, sigma, d);
  if (!std::isfinite(upsilon)) throw ValidationError("upsilon must be finite");
  const double inf = std::numeric_limits<double>::infinity();

  const SubproblemSolution mv = min_quadratic_over_domain(sigma, d);
  const double mv_cost = a0.dot(mv.x);
  const double tol = 1e-12 * (1.0 + std::abs(upsilon));
  if (mv_cost <= upsilon + tol) {
    FrontierPoint p = make_frontier_point(inf, mv.x, a0, sigma, alpha_eval);
    p.upsilon = upsilon;
    return p;
  }

  const SubproblemSolution nominal = nominal_minimize(a0, d);
  const double cost_min = nominal.objective_value;
  if (upsilon < cost_min - tol) {
    throw InfeasibleBudget("nominal-cost budget is below the smallest attainable cost");
  }
  const convex::Polytope base = to_polytope(d);
  const convex::QuadraticObjective f(2.0 * sigma.entries(), Vector::Zero(a0.size()));

  convex::KktPoint k;
  if (upsilon <= cost_min + tol) {
    // The budget pins the nominal-optimal face; start from the nominal vertex.
    const convex::Polytope p = base.with_row(a0, a0.dot(nominal.x));
    std::vector<int> working = nominal.active_set;
    working.push_back(static_cast<int>(p.ineq.rows() - 1));
    k = convex::active_set_minimize(f, p, nominal.x, working);
  } else {
    const convex::Polytope p = base.with_row(a0, upsilon);
    // Blend the nominal optimizer with an interior point until the budget is strict.
    const Vector inner = interior_point(d);
    const double inner_cost = a0.dot(inner);
    double theta = 0.5;
    if (inner_cost > upsilon) theta = 0.5 * (upsilon - cost_min) / (inner_cost - cost_min);
    const Vector start = (1.0 - theta) * nominal.x + theta * inner;
    k = convex::minimize(f, p, start);
  }

  FrontierPoint point = make_frontier_point(inf, k.x, a0, sigma, alpha_eval);
  point.upsilon = upsilon;
  const int budget_row = static_cast<int>(base.ineq.rows());
  for (std::size_t i = 0; i < k.working.size(); ++i) {
    if (k.working[i] == budget_row && k.working_multipliers(static_cast<Eigen::Index>(i)) > 0.0) {
      // Stationarity of 2 Sigma x + mu a0 matches a0 + alpha Sigma x / std at alpha = 2 std / mu.
      point.alpha = 2.0 * point.std_term / k.working_multipliers(static_cast<Eigen::Index>(i));
    }
  }
  return point;
}

}  // namespace frontier
