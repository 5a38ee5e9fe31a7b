#include "frontier/domains.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "frontier/errors.hpp"
#include "frontier/instrumentation.hpp"

namespace frontier {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Feasible range of sum(x) for a box-simplex.
struct SumRange {
  double lo;
  double hi;
};

SumRange box_sum_range(const BoxSimplex& b) {
  return {std::max(b.lower.sum(), 1.0 - b.cash_upper), std::min(b.upper.sum(), 1.0 - b.cash_lower)};
}

SubproblemSolution from_kkt(const convex::KktPoint& k) {
  SubproblemSolution s;
  s.x = k.x;
  s.objective_value = k.value;
  s.iterations = k.iterations;
  s.residual = k.residual;
  s.active_set = k.working;
  return s;
}

std::vector<int> tight_rows(const convex::Polytope& p, const Vector& x) {
  std::vector<int> rows;
  for (Eigen::Index j = 0; j < p.ineq.rows(); ++j) {
    const double slack = p.ineq_rhs(j) - p.ineq.row(j).dot(x);
    if (slack <= 1e-15 * (1.0 + std::abs(p.ineq_rhs(j)))) rows.push_back(static_cast<int>(j));
  }
  return rows;
}

// Breakpoint search for tau with sum(clip(y - tau, l, u)) == target.
Vector clip_shift_to_sum(const Vector& y, const Vector& l, const Vector& u, double target) {
  const Eigen::Index n = y.size();
  auto clipped_sum = [&](double tau) { return (y.array() - tau).max(l.array()).min(u.array()).sum(); };
  std::vector<double> bps;
  bps.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    bps.push_back(y(i) - u(i));
    bps.push_back(y(i) - l(i));
  }
  std::sort(bps.begin(), bps.end());
  // clipped_sum is nonincreasing; find consecutive breakpoints bracketing target.
  double tau = bps.front();
  if (clipped_sum(bps.front()) <= target) {
    tau = bps.front();
  } else if (clipped_sum(bps.back()) >= target) {
    tau = bps.back();
  } else {
    std::size_t lo = 0;
    std::size_t hi = bps.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (clipped_sum(bps[mid]) > target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double s_lo = clipped_sum(bps[lo]);
    const double s_hi = clipped_sum(bps[hi]);
    tau = s_lo == s_hi ? bps[lo] : bps[lo] + (s_lo - target) * (bps[hi] - bps[lo]) / (s_lo - s_hi);
  }
  return (y.array() - tau).max(l.array()).min(u.array()).matrix();
}

}  // namespace

Eigen::Index domain_dim(const DomainSpec& d) {
  return std::visit(Overloaded{[](const Simplex& s) { return s.dim; }, [](const ScaledSimplex& s) { return s.dim; },
                               [](const BoxSimplex& b) { return b.lower.size(); },
                               [](const Polyhedron& p) { return p.a.cols(); }},
                    d);
}

void validate_domain(const DomainSpec& d) {
  std::visit(Overloaded{
                 [](const Simplex& s) {
                   if (s.dim < 1) throw ValidationError("simplex dimension must be positive");
                 },
                 [](const ScaledSimplex& s) {
                   if (s.dim < 1) throw ValidationError("scaled simplex dimension must be positive");
                   if (!(s.cap > 0.0) || !std::isfinite(s.cap)) {
                     throw ValidationError("scaled simplex cap must be positive and finite");
                   }
                 },
                 [](const BoxSimplex& b) {
                   if (b.lower.size() < 1) throw ValidationError("box-simplex dimension must be positive");
                   require_same_dim(b.lower.size(), b.upper.size(), "box-simplex bounds");
                   require_finite(b.lower, "box-simplex lower");
                   require_finite(b.upper, "box-simplex upper");
                   if (!std::isfinite(b.cash_lower) || !std::isfinite(b.cash_upper)) {
                     throw ValidationError("box-simplex cash bounds must be finite");
                   }
                   if ((b.upper - b.lower).minCoeff() < 0.0 || b.cash_upper < b.cash_lower) {
                     throw InfeasibleDomain("box-simplex has a lower bound above its upper bound");
                   }
                   const SumRange r = box_sum_range(b);
                   if (r.lo > r.hi + 1e-12) throw InfeasibleDomain("box-simplex bounds admit no budget-feasible point");
                 },
                 [](const Polyhedron& p) {
                   if (p.a.cols() < 1 || p.a.rows() < 1) throw ValidationError("polyhedron must be non-empty");
                   require_same_dim(p.a.rows(), p.d.size(), "polyhedron rows vs rhs");
                   require_finite(p.a, "polyhedron A");
                   require_finite(p.d, "polyhedron d");
                   if (p.a.minCoeff() < 0.0) throw ValidationError("polyhedron matrix must be nonnegative");
                   if (!(p.d.minCoeff() > 0.0)) throw ValidationError("polyhedron right-hand side must be positive");
                 }},
             d);
}

bool domain_contains_origin(const DomainSpec& d) {
  return std::holds_alternative<ScaledSimplex>(d) || std::holds_alternative<Polyhedron>(d) ||
         (std::holds_alternative<BoxSimplex>(d) && domain_contains(d, Vector::Zero(domain_dim(d)), 0.0));
}

bool domain_contains(const DomainSpec& d, const Vector& x, double tol) {
  if (x.size() != domain_dim(d)) return false;
  return to_polytope(d).violation(x) <= tol;
}

convex::Polytope to_polytope(const DomainSpec& d) {
  const Eigen::Index n = domain_dim(d);
  convex::Polytope p;
  p.eq = Matrix(0, n);
  p.eq_rhs = Vector(0);
  std::visit(Overloaded{
                 [&](const Simplex&) {
                   p.eq = Matrix::Ones(1, n);
                   p.eq_rhs = Vector::Ones(1);
                   p.ineq = -Matrix::Identity(n, n);
                   p.ineq_rhs = Vector::Zero(n);
                 },
                 [&](const ScaledSimplex& s) {
                   p.ineq = Matrix(n + 1, n);
                   p.ineq.topRows(n) = -Matrix::Identity(n, n);
                   p.ineq.row(n).setOnes();
                   p.ineq_rhs = Vector::Zero(n + 1);
                   p.ineq_rhs(n) = s.cap;
                 },
                 [&](const BoxSimplex& b) {
                   std::vector<Vector> eq_rows, ineq_rows;
                   std::vector<double> eq_rhs, ineq_rhs;
                   for (Eigen::Index i = 0; i < n; ++i) {
                     Vector unit = Vector::Zero(n);
                     unit(i) = 1.0;
                     if (b.lower(i) == b.upper(i)) {
                       eq_rows.push_back(unit);
                       eq_rhs.push_back(b.lower(i));
                     } else {
                       ineq_rows.push_back(unit);
                       ineq_rhs.push_back(b.upper(i));
                       ineq_rows.push_back(-unit);
                       ineq_rhs.push_back(-b.lower(i));
                     }
                   }
                   const Vector ones = Vector::Ones(n);
                   if (b.cash_lower == b.cash_upper) {
                     eq_rows.push_back(ones);
                     eq_rhs.push_back(1.0 - b.cash_lower);
                   } else {
                     ineq_rows.push_back(ones);
                     ineq_rhs.push_back(1.0 - b.cash_lower);
                     ineq_rows.push_back(-ones);
                     ineq_rhs.push_back(-(1.0 - b.cash_upper));
                   }
                   p.eq = Matrix(static_cast<Eigen::Index>(eq_rows.size()), n);
                   p.eq_rhs = Vector(static_cast<Eigen::Index>(eq_rows.size()));
                   for (std::size_t k = 0; k < eq_rows.size(); ++k) {
                     p.eq.row(static_cast<Eigen::Index>(k)) = eq_rows[k].transpose();
                     p.eq_rhs(static_cast<Eigen::Index>(k)) = eq_rhs[k];
                   }
                   p.ineq = Matrix(static_cast<Eigen::Index>(ineq_rows.size()), n);
                   p.ineq_rhs = Vector(static_cast<Eigen::Index>(ineq_rows.size()));
                   for (std::size_t k = 0; k < ineq_rows.size(); ++k) {
                     p.ineq.row(static_cast<Eigen::Index>(k)) = ineq_rows[k].transpose();
                     p.ineq_rhs(static_cast<Eigen::Index>(k)) = ineq_rhs[k];
                   }
                 },
                 [&](const Polyhedron& poly) {
                   const Eigen::Index m = poly.a.rows();
                   p.ineq = Matrix(n + m, n);
                   p.ineq.topRows(n) = -Matrix::Identity(n, n);
                   p.ineq.bottomRows(m) = poly.a;
                   p.ineq_rhs = Vector(n + m);
                   p.ineq_rhs.head(n).setZero();
                   p.ineq_rhs.tail(m) = poly.d;
                 }},
             d);
  return p;
}

Vector interior_point(const DomainSpec& d) {
  const Eigen::Index n = domain_dim(d);
  return std::visit(
      Overloaded{[&](const Simplex&) -> Vector { return Vector::Constant(n, 1.0 / static_cast<double>(n)); },
                 [&](const ScaledSimplex& s) -> Vector {
                   return Vector::Constant(n, s.cap / (2.0 * static_cast<double>(n)));
                 },
                 [&](const BoxSimplex& b) -> Vector {
                   const SumRange r = box_sum_range(b);
                   const double target = 0.5 * (r.lo + r.hi);
                   const double width = (b.upper - b.lower).sum();
                   const double theta = width > 0.0 ? (target - b.lower.sum()) / width : 0.0;
                   return b.lower + theta * (b.upper - b.lower);
                 },
                 [&](const Polyhedron& p) -> Vector {
                   double theta = 1.0;
                   bool any = false;
                   for (Eigen::Index i = 0; i < p.a.rows(); ++i) {
                     const double rs = p.a.row(i).sum();
                     if (rs > 0.0) {
                       theta = any ? std::min(theta, p.d(i) / rs) : p.d(i) / rs;
                       any = true;
                     }
                   }
                   return Vector::Constant(n, 0.5 * theta);
                 }},
      d);
}

Vector project_simplex(const Vector& y) {
  const Eigen::Index n = y.size();
  if (n < 1) throw ValidationError("project_simplex: empty vector");
  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) tau = candidate;
  }
  return (y.array() - tau).max(0.0).matrix();
}

Vector project_domain(const Vector& y, const DomainSpec& d) {
  validate_domain(d);
  require_same_dim(y.size(), domain_dim(d), "project_domain");
  require_finite(y, "project_domain");
  return std::visit(Overloaded{[&](const Simplex&) -> Vector { return project_simplex(y); },
                               [&](const ScaledSimplex& s) -> Vector {
                                 Vector z = y.cwiseMax(0.0);
                                 if (z.sum() <= s.cap) return z;
                                 return s.cap * project_simplex(y / s.cap);
                               },
                               [&](const BoxSimplex& b) -> Vector {
                                 const SumRange r = box_sum_range(b);
                                 Vector z = y.cwiseMax(b.lower).cwiseMin(b.upper);
                                 const double s = z.sum();
                                 if (s > r.hi) return clip_shift_to_sum(y, b.lower, b.upper, r.hi);
                                 if (s < r.lo) return clip_shift_to_sum(y, b.lower, b.upper, r.lo);
                                 return z;
                               },
                               [&](const Polyhedron&) -> Vector {
                                 const convex::Polytope p = to_polytope(d);
                                 if (p.violation(y) <= 0.0) return y;
                                 const Eigen::Index n = y.size();
                                 const convex::QuadraticObjective f(Matrix::Identity(n, n), -y, 0.5 * y.squaredNorm());
                                 return convex::minimize(f, p, interior_point(d)).x;
                               }},
                    d);
}

WarmStart warm_start_from(const SubproblemSolution& s) { return {s.x, s.active_set}; }

SubproblemSolution minimize_over_domain(const convex::Objective& f, const DomainSpec& d, const WarmStart* warm) {
  const convex::Polytope p = to_polytope(d);
  if (warm != nullptr) return from_kkt(convex::active_set_minimize(f, p, warm->x, warm->active));
  return from_kkt(convex::minimize(f, p, interior_point(d)));
}

SubproblemSolution solve_linear_plus_quadratic(const Vector& a, double w, const SpdMatrix& s, const Vector& x_ref,
                                               const DomainSpec& d, const WarmStart* warm) {
  validate_domain(d);
  const Eigen::Index n = domain_dim(d);
  require_same_dim(a.size(), n, "solve_linear_plus_quadratic: a");
  require_same_dim(x_ref.size(), n, "solve_linear_plus_quadratic: x_ref");
  require_same_dim(s.dim(), n, "solve_linear_plus_quadratic: S");
  require_finite(a, "solve_linear_plus_quadratic: a");
  require_finite(x_ref, "solve_linear_plus_quadratic: x_ref");
  if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("solve_linear_plus_quadratic: weight must be positive");

  ++solve_counters().prox_solves;
  const convex::ProximalObjective f(a, w, s, x_ref);
  const convex::Polytope p = to_polytope(d);
  if (warm != nullptr) return from_kkt(convex::active_set_minimize(f, p, warm->x, warm->active));
  if (std::holds_alternative<Polyhedron>(d)) return from_kkt(convex::minimize(f, p, interior_point(d)));
  // The projection of x_ref is feasible and usually close to the answer.
  const Vector start = project_domain(x_ref, d);
  return from_kkt(convex::active_set_minimize(f, p, start, tight_rows(p, start)));
}

SubproblemSolution min_quadratic_over_domain(const SpdMatrix& s, const DomainSpec& d, bool force_numeric) {
  validate_domain(d);
  const Eigen::Index n = domain_dim(d);
  require_same_dim(s.dim(), n, "min_quadratic_over_domain");
  ++solve_counters().min_variance_solves;
  const convex::QuadraticObjective f(2.0 * s.entries(), Vector::Zero(n));
  const convex::Polytope p = to_polytope(d);

  if (!force_numeric) {
    if (std::holds_alternative<Simplex>(d)) {
      const Vector y = solve_spd(s, Vector::Ones(n));
      if (y.minCoeff() >= 0.0) {
        SubproblemSolution out;
        out.x = y / y.sum();
        out.objective_value = quad_form(out.x, s);
        out.residual = convex::kkt_residual(f, p, out.x);
        out.closed_form = true;
        out.active_set = tight_rows(p, out.x);
        return out;
      }
    } else if (domain_contains_origin(d)) {
      SubproblemSolution out;
      out.x = Vector::Zero(n);
      out.active_set = tight_rows(p, out.x);
      return out;
    }
  }
  return from_kkt(convex::minimize(f, p, interior_point(d)));
}

SubproblemSolution nominal_minimize(const Vector& a, const DomainSpec& d) {
  validate_domain(d);
  const Eigen::Index n = domain_dim(d);
  require_same_dim(a.size(), n, "nominal_minimize");
  require_finite(a, "nominal_minimize");
  const convex::Polytope p = to_polytope(d);
  const convex::LinearObjective f(a);

  auto finish = [&](Vector x) {
    SubproblemSolution out;
    out.objective_value = a.dot(x);
    out.residual = convex::kkt_residual(f, p, x);
    out.active_set = tight_rows(p, x);
    out.x = std::move(x);
    return out;
  };
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (a(i) < a(best)) best = i;
  }
  if (const auto* sx = std::get_if<Simplex>(&d)) {
    (void)sx;
    Vector x = Vector::Zero(n);
    x(best) = 1.0;
    return finish(std::move(x));
  }
  if (const auto* ss = std::get_if<ScaledSimplex>(&d)) {
    Vector x = Vector::Zero(n);
    if (a(best) < 0.0) x(best) = ss->cap;
    return finish(std::move(x));
  }
  if (const auto* b = std::get_if<BoxSimplex>(&d)) {
    const SumRange r = box_sum_range(*b);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i) < a(j); });
    Vector x = b->lower;
    double total = x.sum();
    for (Eigen::Index i : order) {
      if (total >= r.lo) break;
      const double add = std::min(b->upper(i) - x(i), r.lo - total);
      x(i) += add;
      total += add;
    }
    for (Eigen::Index i : order) {
      if (!(a(i) < 0.0) || total >= r.hi) break;
      const double add = std::min(b->upper(i) - x(i), r.hi - total);
      x(i) += add;
      total += add;
    }
    return finish(std::move(x));
  }
  return from_kkt(convex::minimize(f, p, interior_point(d)));
}

}  // namespace frontier
