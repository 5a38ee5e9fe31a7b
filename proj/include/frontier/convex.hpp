#pragma once

// Small dense convex solvers shared by every module: a primal active-set
// Newton method for smooth objectives over polytopes, a log-barrier path
// following method that also accepts smooth convex inequality constraints,
// and a crossover that turns a barrier point into an exact KKT point.

#include <optional>
#include <vector>

#include "frontier/linalg.hpp"

namespace frontier::convex {

/// Smooth convex function with dense derivatives.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Matrix hessian(const Vector& x) const = 0;
  /// Constant Hessian; a full Newton step then lands on the face minimizer.
  virtual bool quadratic() const { return false; }
};

class LinearObjective final : public Objective {
 public:
  explicit LinearObjective(Vector c) : c_(std::move(c)) {}
  double value(const Vector& x) const override { return c_.dot(x); }
  Vector gradient(const Vector&) const override { return c_; }
  Matrix hessian(const Vector& x) const override { return Matrix::Zero(x.size(), x.size()); }
  bool quadratic() const override { return true; }

 private:
  Vector c_;
};

/// 0.5 x^T H x + c^T x + constant.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Matrix h, Vector c, double constant = 0.0)
      : h_(std::move(h)), c_(std::move(c)), constant_(constant) {}
  double value(const Vector& x) const override { return 0.5 * x.dot(h_ * x) + c_.dot(x) + constant_; }
  Vector gradient(const Vector& x) const override { return h_ * x + c_; }
  Matrix hessian(const Vector&) const override { return h_; }
  bool quadratic() const override { return true; }

 private:
  Matrix h_;
  Vector c_;
  double constant_;
};

/// <a, x> + w (x - ref)^T S (x - ref), kept in centered form so the gradient
/// stays accurate when w is huge.
class ProximalObjective final : public Objective {
 public:
  ProximalObjective(Vector a, double w, const SpdMatrix& s, Vector ref)
      : a_(std::move(a)), w_(w), s_(s.entries()), ref_(std::move(ref)) {}
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector&) const override { return 2.0 * w_ * s_; }
  bool quadratic() const override { return true; }

 private:
  Vector a_;
  double w_;
  Matrix s_;
  Vector ref_;
};

/// <a, x> + alpha * sqrt(x^T S x + delta^2). delta > 0 smooths the kink at 0.
class MeanStdObjective final : public Objective {
 public:
  MeanStdObjective(Vector a, double alpha, const SpdMatrix& s, double delta = 0.0)
      : a_(std::move(a)), alpha_(alpha), s_(s.entries()), delta_(delta) {}
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;
  bool quadratic() const override { return alpha_ == 0.0; }

 private:
  Vector a_;
  double alpha_;
  Matrix s_;
  double delta_;
};

/// {x : eq x == eq_rhs, ineq x <= ineq_rhs}.
struct Polytope {
  Matrix eq;
  Vector eq_rhs;
  Matrix ineq;
  Vector ineq_rhs;

  Eigen::Index dim() const { return eq.cols() > 0 ? eq.cols() : ineq.cols(); }
  /// Largest violation of any constraint (0 when feasible).
  double violation(const Vector& x) const;
  Polytope with_row(const Vector& row, double rhs) const;
};

/// Result of an exact (active-set) solve.
struct KktPoint {
  Vector x;
  double value = 0.0;
  /// Inequality rows held with equality at the solution.
  std::vector<int> working;
  /// Multipliers of `working`, aligned with it (nonnegative at optimality).
  Vector working_multipliers;
  Vector eq_multipliers;
  /// max(stationarity, dual infeasibility) / max(1, |grad|_inf), plus primal violation.
  double residual = 0.0;
  int iterations = 0;
};

struct ActiveSetOptions {
  int max_iterations = 20000;
  double stationarity_tolerance = 1e-13;
  double dual_tolerance = 1e-12;
};

/// Primal active-set Newton method. `x` must be feasible and satisfy every
/// row in `working` with equality (small drift is corrected). Rows added on
/// ties are chosen by lowest index.
KktPoint active_set_minimize(const Objective& f, const Polytope& p, Vector x,
                             std::vector<int> working, const ActiveSetOptions& opts = {});

struct BarrierOptions {
  /// Stop when (#inequalities)/t falls below gap_tolerance * objective scale.
  double gap_tolerance = 1e-10;
  double t_growth = 30.0;
  double t0 = 0.0;  // 0 = automatic
  int max_newton_steps = 2000;
  /// Optional early exit: stop as soon as f(x) < stop_below (phase-one use).
  std::optional<double> stop_below;
};

struct BarrierResult {
  Vector x;
  double value = 0.0;
  double t = 0.0;
  double gap = 0.0;
  int newton_steps = 0;
  Vector ineq_multipliers;
  Vector nonlinear_multipliers;
  Vector eq_multipliers;
  /// Norm of the Lagrangian gradient using the central-path multipliers.
  double stationarity = 0.0;
};

/// Log-barrier path following for min f s.t. polytope and g_i(x) <= 0.
/// `x` must be strictly feasible for every inequality.
BarrierResult barrier_minimize(const Objective& f, const Polytope& p,
                               const std::vector<const Objective*>& nonlinear, Vector x,
                               const BarrierOptions& opts = {});

/// Barrier warm start followed by active-set crossover; exact at the end.
KktPoint minimize(const Objective& f, const Polytope& p, const Vector& interior,
                  const ActiveSetOptions& opts = {});

/// Active set guess from a barrier point, snapped onto its face, then polished.
KktPoint crossover(const Objective& f, const Polytope& p, const Vector& barrier_point,
                   const ActiveSetOptions& opts = {});

/// KKT residual of a candidate point, with the active set guessed from slacks.
double kkt_residual(const Objective& f, const Polytope& p, const Vector& x,
                    double activity_tolerance = 1e-9);

}  // namespace frontier::convex
