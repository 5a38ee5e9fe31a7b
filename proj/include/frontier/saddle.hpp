#pragma once

#include "frontier/linalg.hpp"
#include "frontier/robust_frontier.hpp"

namespace frontier {

/// min <c0, x> over the simplex subject to m uncertain rows <c_i + xi_i, x> <= b_i,
/// every xi_i ranging over the same ellipsoid shaped by Sigma.
struct RcwucInstance {
  Vector c0;
  Matrix C;  // m x n
  Vector b;
  SpdMatrix sigma;

  Eigen::Index dim() const { return c0.size(); }
  Eigen::Index count() const { return C.rows(); }
};

/// Checks dimensions and that {x in simplex : C x <= b} is nonempty.
void validate_rcwuc(const RcwucInstance& inst);

struct SaddleState {
  Vector x;
  Vector lambda;
  /// Largest constraint violation plus the distance of <c0, x> to the best feasible iterate.
  double gap_estimate = 0.0;
  int rounds = 0;
};

struct SaddleOptions {
  int iters = 20000;
  /// Initial ascent step. For alpha > 0 it is halved on insufficient dual ascent and doubled after success.
  double step_lambda = 0.1;
  /// For alpha = 0, round k uses step_lambda / (1 + (1 - step_decay) k).
  double step_decay = 0.999;
  double divergence_bound = 1e8;
};

/// Alternating scheme on <c0,x> + <lambda, Cx> + alpha <lambda,e> x'Sigma x - <lambda,b>:
/// projected ascent in lambda, exact minimization in x over the simplex. Stops early
/// once the projected ascent direction vanishes.
SaddleState saddle_oracle(const RcwucInstance& inst, double alpha, const SaddleOptions& opts = {});

struct RcwucSolution {
  Vector x;
  /// Multipliers of the m uncertain rows.
  Vector multipliers;
  double objective_value = 0.0;
  /// Scaled KKT residual (stationarity, feasibility, complementarity).
  double residual = 0.0;
  /// The barrier point was refined by Newton's method on the KKT system.
  bool polished = false;
};

/// min <c0,x> s.t. <c_i,x> + beta sqrt(x'Sigma x) <= b_i, x in the simplex.
/// Throws InfeasibleAtBeta when no strictly feasible point exists.
RcwucSolution solve_rcwuc_norm_form(const RcwucInstance& inst, double beta);

/// The same solve packaged as a frontier point: alpha holds beta, robustness equals efficiency.
FrontierPoint solve_rcwuc_direct(const RcwucInstance& inst, double beta);

/// min <c0,x> s.t. <c_i,x> + alpha x'Sigma x <= b_i, x in the simplex (the primal of the saddle problem).
RcwucSolution solve_rcwuc_penalized(const RcwucInstance& inst, double alpha);

/// beta = alpha sqrt(x'Sigma x) at a saddle output x.
double beta_of_iterate(const Vector& x, const SpdMatrix& sigma, double alpha);

/// Runs the saddle oracle at alpha and maps its output to beta.
double map_alpha_to_beta(const RcwucInstance& inst, double alpha, const SaddleOptions& opts = {});

}  // namespace frontier
