#include "frontier/ppm.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "frontier/errors.hpp"

namespace frontier {

namespace {

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(what) + " must be positive and finite");
}

double inf_norm(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

void validate_ppm_config(const PpmConfig& cfg) {
  if (cfg.max_steps < 1) throw ValidationError("max_steps must be at least 1");
  check_positive(cfg.subproblem_tolerance, "subproblem_tolerance");
  check_positive(cfg.omega_min, "omega_min");
  switch (cfg.rule) {
    case LambdaRule::constant:
      if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) throw NonPositiveLambda("lambda must be positive");
      break;
    case LambdaRule::explicit_list:
      if (cfg.lambdas.empty()) throw ValidationError("explicit lambda list is empty");
      for (double l : cfg.lambdas) {
        if (!(l > 0.0) || !std::isfinite(l)) throw NonPositiveLambda("every lambda must be positive");
      }
      break;
    case LambdaRule::geometric:
      check_positive(cfg.omega_start, "omega_start");
      if (!(cfg.omega_ratio > 0.0 && cfg.omega_ratio < 1.0)) {
        throw ValidationError("omega_ratio must lie strictly between 0 and 1");
      }
      break;
  }
}

double lambda_at(const PpmConfig& cfg, int k) {
  switch (cfg.rule) {
    case LambdaRule::constant:
      return cfg.lambda;
    case LambdaRule::explicit_list:
      if (k < 0 || k >= static_cast<int>(cfg.lambdas.size())) throw ValidationError("lambda index out of range");
      return cfg.lambdas[static_cast<std::size_t>(k)];
    case LambdaRule::geometric: {
      if (k == 0) return cfg.omega_start;
      // 1/lambda_k = 1/omega_{k+1} - 1/omega_k with omega_k = start * ratio^(k-1).
      const double omega_k = cfg.omega_start * std::pow(cfg.omega_ratio, k - 1);
      return omega_k * cfg.omega_ratio / (1.0 - cfg.omega_ratio);
    }
  }
  return cfg.lambda;
}

std::vector<double> omega_schedule(const std::vector<double>& lambdas) {
  std::vector<double> omegas;
  omegas.reserve(lambdas.size());
  double inverse_sum = 0.0;
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) throw NonPositiveLambda("every lambda must be positive");
    inverse_sum += 1.0 / l;
    omegas.push_back(1.0 / inverse_sum);
  }
  return omegas;
}

double alpha_of_omega(const Vector& x_omega, double omega, const SpdMatrix& sigma) {
  check_positive(omega, "omega");
  const double q = quad_form(x_omega, sigma);
  if (q == 0.0) throw ZeroIterate("alpha(omega) is undefined at a zero-variance iterate");
  return 2.0 * omega * std::sqrt(q);
}

SubproblemSolution ppm_step(const Vector& x_k, double lambda_k, const Vector& a0, const SpdMatrix& sigma,
                            const DomainSpec& d, const WarmStart* warm) {
  if (!(lambda_k > 0.0) || !std::isfinite(lambda_k)) throw NonPositiveLambda("lambda must be positive");
  return solve_linear_plus_quadratic(a0, lambda_k, sigma, x_k, d, warm);
}

Vector most_robust_start(const Vector& a0, const SpdMatrix& sigma, const DomainSpec& d) {
  require_same_dim(a0.size(), domain_dim(d), "most_robust_start");
  return min_quadratic_over_domain(sigma, d).x;
}

Trajectory run_ppm_trajectory(const Vector& a0, const SpdMatrix& sigma, const DomainSpec& d, const PpmConfig& cfg,
                              double alpha_eval, const std::function<void(const FrontierPoint&)>& on_point) {
  validate_ppm_config(cfg);
  validate_domain(d);
  require_same_dim(a0.size(), domain_dim(d), "run_ppm_trajectory: a0");
  require_same_dim(sigma.dim(), domain_dim(d), "run_ppm_trajectory: Sigma");
  if (!(alpha_eval >= 0.0) || !std::isfinite(alpha_eval)) throw ValidationError("alpha_eval must be nonnegative");

  Trajectory traj;
  traj.config = cfg;
  traj.provenance = Provenance::ppm;
  traj.eval_radius = alpha_eval;
  traj.finite_schedule_warning = cfg.rule == LambdaRule::explicit_list;

  const SubproblemSolution start = min_quadratic_over_domain(sigma, d);
  traj.start = start.x;
  traj.max_residual = start.residual;

  int steps = cfg.max_steps;
  if (cfg.rule == LambdaRule::explicit_list) steps = std::min(steps, static_cast<int>(cfg.lambdas.size()));

  Vector x = start.x;
  WarmStart warm = warm_start_from(start);
  double inverse_sum = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double lambda = lambda_at(cfg, k);
    inverse_sum += 1.0 / lambda;
    const double omega = 1.0 / inverse_sum;
    if (omega < cfg.omega_min) break;

    const SubproblemSolution s = ppm_step(x, lambda, a0, sigma, d, &warm);
    traj.max_residual = std::max(traj.max_residual, s.residual);
    x = s.x;
    warm = warm_start_from(s);
    traj.lambdas.push_back(lambda);

    const double q = quad_form(x, sigma);
    const double alpha = q > 0.0 ? alpha_of_omega(x, omega, sigma) : std::numeric_limits<double>::infinity();
    FrontierPoint p = make_frontier_point(alpha, x, a0, sigma, alpha_eval);
    p.omega = omega;
    p.step = k + 1;
    if (on_point) on_point(p);
    traj.points.push_back(std::move(p));
  }
  return traj;
}

FrontierComparison compare_frontiers(const Vector& a0, const SpdMatrix& sigma, const DomainSpec& d,
                                     const PpmConfig& cfg, double alpha_eval) {
  FrontierComparison out;
  out.trajectory = run_ppm_trajectory(a0, sigma, d, cfg, alpha_eval);
  std::optional<WarmStart> warm;
  for (const FrontierPoint& p : out.trajectory.points) {
    if (!std::isfinite(p.alpha)) {
      ++out.skipped;
      continue;
    }
    const SubproblemSolution s = solve_mean_std(a0, sigma, p.alpha, d, warm ? &*warm : nullptr);
    if (p.alpha > 0.0) warm = warm_start_from(s);
    MatchedPoint m;
    m.ppm = p;
    m.exact = make_frontier_point(p.alpha, s.x, a0, sigma, alpha_eval);
    m.matching_error = (p.x - s.x).cwiseAbs().maxCoeff();
    m.efficiency_gap = std::abs(p.efficiency - m.exact.efficiency);
    m.robustness_gap = std::abs(p.robustness - m.exact.robustness);
    out.max_matching_error = std::max(out.max_matching_error, m.matching_error);
    out.max_efficiency_gap = std::max(out.max_efficiency_gap, m.efficiency_gap);
    out.max_robustness_gap = std::max(out.max_robustness_gap, m.robustness_gap);
    out.points.push_back(std::move(m));
  }
  return out;
}

Vector central_path_point(double omega, const Vector& x0, const Vector& a0, const SpdMatrix& sigma,
                          const DomainSpec& d) {
  check_positive(omega, "omega");
  return solve_linear_plus_quadratic(a0, omega, sigma, x0, d).x;
}

namespace {

Vector checked_gradient(const convex::Objective& f, const Vector& x) {
  Vector g = f.gradient(x);
  if (!g.allFinite()) throw NonFiniteGradient("objective gradient is not finite");
  return g;
}

FirstOrderRun first_order_run(const convex::Objective& f, const DomainSpec& d, const Vector& start, double step,
                              int iters, bool extra) {
  check_positive(step, "step");
  if (iters < 0) throw ValidationError("iteration count must be nonnegative");
  FirstOrderRun run;
  run.iterates.push_back(project_domain(start, d));
  double first_move = -1.0;
  double last_move = 0.0;
  for (int k = 0; k < iters; ++k) {
    const Vector& x = run.iterates.back();
    Vector next;
    if (extra) {
      const Vector y = project_domain(x - step * checked_gradient(f, x), d);
      next = project_domain(x - step * checked_gradient(f, y), d);
    } else {
      next = project_domain(x - step * checked_gradient(f, x), d);
    }
    last_move = inf_norm(next - x);
    if (first_move < 0.0) first_move = last_move;
    run.iterates.push_back(std::move(next));
  }
  const double f0 = f.value(run.iterates.front());
  const bool no_contraction = iters > 1 && last_move > 1e-12 && last_move >= first_move;
  const bool ascended = f.value(run.iterates.back()) > f0 + 1e-12 * (1.0 + std::abs(f0));
  run.unstable = no_contraction || ascended;
  return run;
}

}  // namespace

FirstOrderRun extragradient_trajectory(const convex::Objective& f, const DomainSpec& d, const Vector& start,
                                       double step, int iters) {
  return first_order_run(f, d, start, step, iters, true);
}

FirstOrderRun projected_gradient_trajectory(const convex::Objective& f, const DomainSpec& d, const Vector& start,
                                            double step, int iters) {
  return first_order_run(f, d, start, step, iters, false);
}

}  // namespace frontier
