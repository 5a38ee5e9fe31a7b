#include "frontier/saddle.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <memory>

#include "frontier/convex.hpp"
#include "frontier/domains.hpp"
#include "frontier/errors.hpp"

namespace frontier {

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/// <c, x> + beta sqrt(x'Sx) - b.
class NormRow final : public convex::Objective {
 public:
  NormRow(Vector c, double beta, const Matrix& s, double b) : c_(std::move(c)), beta_(beta), s_(s), b_(b) {}
  double value(const Vector& x) const override { return c_.dot(x) + beta_ * std::sqrt(x.dot(s_ * x)) - b_; }
  Vector gradient(const Vector& x) const override {
    const double root = std::sqrt(x.dot(s_ * x));
    if (beta_ == 0.0 || root == 0.0) return c_;
    return c_ + (beta_ / root) * (s_ * x);
  }
  Matrix hessian(const Vector& x) const override {
    const Eigen::Index n = x.size();
    const double root = std::sqrt(x.dot(s_ * x));
    if (beta_ == 0.0 || root == 0.0) return Matrix::Zero(n, n);
    const Vector sx = s_ * x;
    return (beta_ / root) * (s_ - (sx * sx.transpose()) / (root * root));
  }

 private:
  Vector c_;
  double beta_;
  const Matrix& s_;
  double b_;
};

/// <c, x> + alpha x'Sx - b.
class QuadraticRow final : public convex::Objective {
 public:
  QuadraticRow(Vector c, double alpha, const Matrix& s, double b) : c_(std::move(c)), alpha_(alpha), s_(s), b_(b) {}
  double value(const Vector& x) const override { return c_.dot(x) + alpha_ * x.dot(s_ * x) - b_; }
  Vector gradient(const Vector& x) const override { return c_ + 2.0 * alpha_ * (s_ * x); }
  Matrix hessian(const Vector&) const override { return 2.0 * alpha_ * s_; }
  bool quadratic() const override { return true; }

 private:
  Vector c_;
  double alpha_;
  const Matrix& s_;
  double b_;
};

/// g(x) - s on the stacked vector (x, s).
class LiftedRow final : public convex::Objective {
 public:
  explicit LiftedRow(const convex::Objective& g) : g_(g) {}
  double value(const Vector& y) const override { return g_.value(y.head(y.size() - 1)) - y(y.size() - 1); }
  Vector gradient(const Vector& y) const override {
    Vector out(y.size());
    out.head(y.size() - 1) = g_.gradient(y.head(y.size() - 1));
    out(y.size() - 1) = -1.0;
    return out;
  }
  Matrix hessian(const Vector& y) const override {
    Matrix out = Matrix::Zero(y.size(), y.size());
    out.topLeftCorner(y.size() - 1, y.size() - 1) = g_.hessian(y.head(y.size() - 1));
    return out;
  }

 private:
  const convex::Objective& g_;
};

using Rows = std::vector<std::unique_ptr<convex::Objective>>;

std::vector<const convex::Objective*> raw(const Rows& rows) {
  std::vector<const convex::Objective*> out;
  for (const auto& r : rows) out.push_back(r.get());
  return out;
}

convex::Polytope simplex_polytope(Eigen::Index n, Eigen::Index extra_columns = 0) {
  convex::Polytope p;
  p.eq = Matrix::Zero(1, n + extra_columns);
  p.eq.leftCols(n).setOnes();
  p.eq_rhs = Vector::Ones(1);
  p.ineq = Matrix::Zero(n, n + extra_columns);
  p.ineq.leftCols(n) = -Matrix::Identity(n, n);
  p.ineq_rhs = Vector::Zero(n);
  return p;
}

double max_row_value(const Rows& rows, const Vector& x) {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows) v = std::max(v, r->value(x));
  return v;
}

/// Minimizes max_i g_i(x) over the simplex; returns the point and the attained value.
/// Stops as soon as the value is negative when `stop_at_zero`.
std::pair<Vector, double> phase_one(Eigen::Index n, const Rows& rows, bool stop_at_zero) {
  const Vector center = Vector::Constant(n, 1.0 / static_cast<double>(n));
  if (rows.empty()) return {center, -std::numeric_limits<double>::infinity()};
  const double start_value = max_row_value(rows, center);
  if (stop_at_zero && start_value < 0.0) return {center, start_value};

  std::vector<LiftedRow> lifted;
  lifted.reserve(rows.size());
  for (const auto& r : rows) lifted.emplace_back(*r);
  std::vector<const convex::Objective*> lifted_ptrs;
  for (const auto& l : lifted) lifted_ptrs.push_back(&l);

  Vector goal = Vector::Zero(n + 1);
  goal(n) = 1.0;
  const convex::LinearObjective f(goal);
  Vector y(n + 1);
  y.head(n) = center;
  y(n) = start_value + 1.0;
  convex::BarrierOptions opts;
  if (stop_at_zero) opts.stop_below = 0.0;
  const convex::BarrierResult r = convex::barrier_minimize(f, simplex_polytope(n, 1), lifted_ptrs, y, opts);
  const Vector x = r.x.head(n);
  return {x, max_row_value(rows, x)};
}

/// Scaled KKT residual for min <c0,x> s.t. g_i(x) <= 0, x in the simplex.
double kkt_residual(const Vector& c0, const Rows& rows, const Vector& x, const Vector& mu) {
  Vector grad = c0;
  double feasibility = 0.0;
  double complementarity = 0.0;
  double dual = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double m = mu(static_cast<Eigen::Index>(i));
    const double g = rows[i]->value(x);
    grad += m * rows[i]->gradient(x);
    feasibility = std::max(feasibility, g);
    complementarity = std::max(complementarity, std::abs(m * g));
    dual = std::max(dual, -m);
  }
  // Simplex multipliers: nu = -min grad, eta_j = grad_j - min grad.
  const double low = grad.minCoeff();
  double stationarity = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    stationarity = std::max(stationarity, std::abs(x(j)) * (grad(j) - low));
    feasibility = std::max(feasibility, -x(j));
  }
  feasibility = std::max(feasibility, std::abs(x.sum() - 1.0));
  const double scale = 1.0 + inf_norm(c0);
  return std::max({stationarity / scale, feasibility, complementarity / scale, dual / scale});
}

struct Polished {
  Vector x;
  Vector mu;
};

/// Newton's method on the KKT equations of the face picked out by the barrier multipliers.
std::optional<Polished> polish(const Vector& c0, const Rows& rows, const Vector& x0, const Vector& row_mu,
                               const Vector& bound_mu) {
  const Eigen::Index n = x0.size();
  std::vector<Eigen::Index> free_idx, active;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(bound_mu(j) > x0(j))) free_idx.push_back(j);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (row_mu(ii) > -rows[i]->value(x0)) active.push_back(ii);
  }
  const auto nf = static_cast<Eigen::Index>(free_idx.size());
  const auto na = static_cast<Eigen::Index>(active.size());
  if (nf == 0) return std::nullopt;

  Vector x = Vector::Zero(n);
  for (Eigen::Index j : free_idx) x(j) = x0(j);
  Vector mu = Vector::Zero(static_cast<Eigen::Index>(rows.size()));
  for (Eigen::Index i : active) mu(i) = row_mu(i);
  // nu from the mean reduced gradient on the free coordinates.
  Vector grad = c0;
  for (Eigen::Index i : active) grad += mu(i) * rows[static_cast<std::size_t>(i)]->gradient(x);
  double nu = 0.0;
  for (Eigen::Index j : free_idx) nu -= grad(j) / static_cast<double>(nf);

  const double scale = 1.0 + inf_norm(c0);
  const Eigen::Index dim = nf + na + 1;
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    Vector r(dim);
    Matrix jac = Matrix::Zero(dim, dim);
    Vector g = c0;
    Matrix h = Matrix::Zero(n, n);
    for (Eigen::Index i : active) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      g += mu(i) * row->gradient(x);
      h += mu(i) * row->hessian(x);
    }
    for (Eigen::Index a = 0; a < nf; ++a) {
      r(a) = g(free_idx[static_cast<std::size_t>(a)]) + nu;
      for (Eigen::Index c = 0; c < nf; ++c) {
        jac(a, c) = h(free_idx[static_cast<std::size_t>(a)], free_idx[static_cast<std::size_t>(c)]);
      }
      jac(a, nf + na) = 1.0;
      jac(nf + na, a) = 1.0;
    }
    for (Eigen::Index k = 0; k < na; ++k) {
      const auto& row = rows[static_cast<std::size_t>(active[static_cast<std::size_t>(k)])];
      r(nf + k) = row->value(x);
      const Vector rg = row->gradient(x);
      for (Eigen::Index a = 0; a < nf; ++a) {
        jac(nf + k, a) = rg(free_idx[static_cast<std::size_t>(a)]);
        jac(a, nf + k) = rg(free_idx[static_cast<std::size_t>(a)]);
      }
    }
    double sum = 0.0;
    for (Eigen::Index j : free_idx) sum += x(j);
    r(nf + na) = sum - 1.0;
    if (!r.allFinite()) return std::nullopt;
    if (inf_norm(r) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) return std::nullopt;
    const Vector dz = lu.solve(-r);
    for (Eigen::Index a = 0; a < nf; ++a) x(free_idx[static_cast<std::size_t>(a)]) += dz(a);
    for (Eigen::Index k = 0; k < na; ++k) mu(active[static_cast<std::size_t>(k)]) += dz(nf + k);
    nu += dz(nf + na);
    if (inf_norm(dz) <= 1e-15 * (1.0 + inf_norm(x))) {
      converged = true;
      break;
    }
  }
  if (!converged) return std::nullopt;
  for (Eigen::Index j : free_idx) {
    if (x(j) < -1e-13) return std::nullopt;
    x(j) = std::max(x(j), 0.0);
  }
  if (mu.size() > 0 && mu.minCoeff() < -1e-12 * scale) return std::nullopt;
  for (const auto& row : rows) {
    if (row->value(x) > 1e-12 * scale) return std::nullopt;
  }
  return Polished{x, mu.cwiseMax(0.0)};
}

RcwucSolution solve_on_simplex(const Vector& c0, const Rows& rows, const char* infeasible_message) {
  const Eigen::Index n = c0.size();
  auto [start, start_value] = phase_one(n, rows, true);
  if (!(start_value < 0.0)) throw InfeasibleAtBeta(infeasible_message);

  const convex::LinearObjective f(c0);
  const convex::Polytope p = simplex_polytope(n);
  const convex::BarrierResult br = convex::barrier_minimize(f, p, raw(rows), start);

  RcwucSolution out;
  out.x = br.x;
  out.multipliers = br.nonlinear_multipliers;
  out.residual = kkt_residual(c0, rows, out.x, out.multipliers);
  if (auto pol = polish(c0, rows, br.x, br.nonlinear_multipliers, br.ineq_multipliers)) {
    const double r = kkt_residual(c0, rows, pol->x, pol->mu);
    if (r <= out.residual) {
      out.x = pol->x;
      out.multipliers = pol->mu;
      out.residual = r;
      out.polished = true;
    }
  }
  out.objective_value = c0.dot(out.x);
  return out;
}

Rows norm_rows(const RcwucInstance& inst, double beta) {
  Rows rows;
  for (Eigen::Index i = 0; i < inst.count(); ++i) {
    rows.push_back(std::make_unique<NormRow>(inst.C.row(i).transpose(), beta, inst.sigma.entries(), inst.b(i)));
  }
  return rows;
}

Rows quadratic_rows(const RcwucInstance& inst, double alpha) {
  Rows rows;
  for (Eigen::Index i = 0; i < inst.count(); ++i) {
    rows.push_back(
        std::make_unique<QuadraticRow>(inst.C.row(i).transpose(), alpha, inst.sigma.entries(), inst.b(i)));
  }
  return rows;
}

void check_radius(double r, const char* what) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw ValidationError(std::string(what) + " must be finite and nonnegative");
}

Vector penalized_violation(const RcwucInstance& inst, const Vector& x, double alpha) {
  return inst.C * x + Vector::Constant(inst.count(), alpha * quad_form(x, inst.sigma)) - inst.b;
}

/// For alpha = 0 the x-update only returns vertices. Rebuild the primal point as the
/// combination of the vertices visited late in the run that makes the rows with
/// positive multipliers tight.
std::optional<Vector> recover_lp_point(const RcwucInstance& inst, const std::vector<Eigen::Index>& support,
                                       const Vector& lambda) {
  std::vector<Eigen::Index> tight;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > 0.0) tight.push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(support.size());
  const auto t = static_cast<Eigen::Index>(tight.size());
  if (k != t + 1) return std::nullopt;
  Matrix a(k, k);
  Vector rhs(k);
  for (Eigen::Index r = 0; r < t; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) a(r, c) = inst.C(tight[static_cast<std::size_t>(r)], support[static_cast<std::size_t>(c)]);
    rhs(r) = inst.b(tight[static_cast<std::size_t>(r)]);
  }
  a.row(t).setOnes();
  rhs(t) = 1.0;
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) return std::nullopt;
  const Vector weights = lu.solve(rhs);
  if (weights.minCoeff() < -1e-12) return std::nullopt;
  Vector x = Vector::Zero(inst.dim());
  for (Eigen::Index c = 0; c < k; ++c) x(support[static_cast<std::size_t>(c)]) = std::max(weights(c), 0.0);
  if ((inst.C * x - inst.b).maxCoeff() > 1e-10 * (1.0 + inf_norm(inst.b))) return std::nullopt;
  return x;
}

}  // namespace

void validate_rcwuc(const RcwucInstance& inst) {
  const Eigen::Index n = inst.dim();
  if (n < 1) throw ValidationError("RCWUC instance needs at least one variable");
  require_same_dim(inst.C.cols(), n, "RCWUC constraint matrix columns");
  require_same_dim(inst.b.size(), inst.C.rows(), "RCWUC right-hand side");
  require_same_dim(inst.sigma.dim(), n, "RCWUC Sigma");
  require_finite(inst.c0, "c0");
  require_finite(inst.b, "b");
  if (!inst.C.allFinite()) throw ValidationError("C must be finite");
  const Rows rows = norm_rows(inst, 0.0);
  const auto [x, value] = phase_one(n, rows, true);
  if (value > 1e-9 * (1.0 + inf_norm(inst.b))) {
    throw ValidationError("RCWUC constraints are infeasible on the simplex even without uncertainty");
  }
}

SaddleState saddle_oracle(const RcwucInstance& inst, double alpha, const SaddleOptions& opts) {
  validate_rcwuc(inst);
  check_radius(alpha, "alpha");
  if (opts.iters < 1) throw ValidationError("iters must be at least 1");
  if (!(opts.step_lambda > 0.0) || !std::isfinite(opts.step_lambda)) {
    throw ValidationError("step_lambda must be positive");
  }
  if (!(opts.step_decay > 0.0 && opts.step_decay <= 1.0)) throw ValidationError("step_decay must lie in (0, 1]");

  const Eigen::Index n = inst.dim();
  const Eigen::Index m = inst.count();
  const Simplex simplex{n};
  const Vector origin = Vector::Zero(n);

  SaddleState state;
  state.lambda = Vector::Zero(m);
  std::optional<WarmStart> warm;
  const auto respond = [&](const Vector& lambda) {
    const Vector a = inst.c0 + inst.C.transpose() * lambda;
    const double w = alpha * lambda.sum();
    if (w > 0.0) return solve_linear_plus_quadratic(a, w, inst.sigma, origin, simplex, warm ? &*warm : nullptr);
    return nominal_minimize(a, simplex);
  };
  const auto check_divergence = [&](const Vector& lambda) {
    if (!lambda.allFinite() || (m > 0 && lambda.maxCoeff() > opts.divergence_bound)) {
      throw DivergenceDetected("saddle multipliers exceeded the divergence bound");
    }
  };

  state.x = nominal_minimize(inst.c0, simplex).x;
  Vector viol = penalized_violation(inst, state.x, alpha);
  double step = opts.step_lambda;
  const double decay_rate = 1.0 - opts.step_decay;
  double best_feasible = std::numeric_limits<double>::infinity();
  const double feas_tol = 1e-9 * (1.0 + inf_norm(inst.b));
  std::vector<bool> late_vertex(static_cast<std::size_t>(n), false);

  for (int k = 0; k < opts.iters; ++k) {
    const Vector projected = (state.lambda + viol).cwiseMax(0.0);
    if (inf_norm(projected - state.lambda) <= 1e-15 * (1.0 + inf_norm(state.lambda) + inf_norm(inst.b))) break;

    if (alpha == 0.0) {
      // Nonsmooth dual: plain projected subgradient ascent with a decaying step.
      const double s = opts.step_lambda / (1.0 + decay_rate * static_cast<double>(k));
      state.lambda = (state.lambda + s * viol).cwiseMax(0.0);
      check_divergence(state.lambda);
      state.x = respond(state.lambda).x;
      if (2 * k >= opts.iters) {
        Eigen::Index j = 0;
        state.x.maxCoeff(&j);
        late_vertex[static_cast<std::size_t>(j)] = true;
      }
      viol = penalized_violation(inst, state.x, alpha);
    } else {
      // Projected ascent with a local Lipschitz test on the dual gradient: the
      // step is halved until it is below the inverse curvature seen along the move.
      bool accepted = false;
      bool stalled = false;
      for (int attempt = 0; attempt < 60 && !accepted && !stalled; ++attempt) {
        const Vector trial = (state.lambda + step * viol).cwiseMax(0.0);
        check_divergence(trial);
        const Vector move = trial - state.lambda;
        if (move.squaredNorm() == 0.0) {
          stalled = true;
          break;
        }
        const SubproblemSolution sol = respond(trial);
        const Vector trial_viol = penalized_violation(inst, sol.x, alpha);
        if ((viol - trial_viol).dot(move) <= move.squaredNorm() / step) {
          state.lambda = trial;
          state.x = sol.x;
          viol = trial_viol;
          if (alpha * trial.sum() > 0.0) warm = warm_start_from(sol);
          accepted = true;
        } else {
          step *= 0.5;
        }
      }
      if (stalled) break;
      if (!accepted) break;
      step *= 2.0;
    }
    state.rounds = k + 1;
    if (m == 0 || viol.maxCoeff() <= feas_tol) best_feasible = std::min(best_feasible, inst.c0.dot(state.x));
  }

  if (alpha == 0.0 && m > 0) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (late_vertex[static_cast<std::size_t>(j)]) support.push_back(j);
    }
    if (auto x = recover_lp_point(inst, support, state.lambda)) state.x = *x;
  }

  const double violation = m > 0 ? std::max(0.0, penalized_violation(inst, state.x, alpha).maxCoeff()) : 0.0;
  if (violation <= feas_tol) best_feasible = std::min(best_feasible, inst.c0.dot(state.x));
  state.gap_estimate = violation;
  if (std::isfinite(best_feasible)) state.gap_estimate += std::abs(inst.c0.dot(state.x) - best_feasible);
  return state;
}

RcwucSolution solve_rcwuc_norm_form(const RcwucInstance& inst, double beta) {
  validate_rcwuc(inst);
  check_radius(beta, "beta");
  return solve_on_simplex(inst.c0, norm_rows(inst, beta), "no strictly feasible point at this beta");
}

FrontierPoint solve_rcwuc_direct(const RcwucInstance& inst, double beta) {
  const RcwucSolution s = solve_rcwuc_norm_form(inst, beta);
  FrontierPoint p;
  p.alpha = beta;
  p.x = s.x;
  p.nominal_cost = s.objective_value;
  p.std_term = std::sqrt(quad_form(s.x, inst.sigma));
  p.efficiency = -p.nominal_cost;
  p.robustness = p.efficiency;
  p.upsilon = p.nominal_cost;
  return p;
}

RcwucSolution solve_rcwuc_penalized(const RcwucInstance& inst, double alpha) {
  validate_rcwuc(inst);
  check_radius(alpha, "alpha");
  return solve_on_simplex(inst.c0, quadratic_rows(inst, alpha), "no strictly feasible point at this alpha");
}

double beta_of_iterate(const Vector& x, const SpdMatrix& sigma, double alpha) {
  check_radius(alpha, "alpha");
  if (alpha == 0.0) return 0.0;
  const double q = quad_form(x, sigma);
  if (q == 0.0) throw ZeroIterate("beta is undefined at a zero-variance iterate");
  return alpha * std::sqrt(q);
}

double map_alpha_to_beta(const RcwucInstance& inst, double alpha, const SaddleOptions& opts) {
  return beta_of_iterate(saddle_oracle(inst, alpha, opts).x, inst.sigma, alpha);
}

}  // namespace frontier
