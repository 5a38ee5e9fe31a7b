#pragma once

#include <functional>
#include <vector>

#include "frontier/convex.hpp"
#include "frontier/domains.hpp"
#include "frontier/robust_frontier.hpp"

namespace frontier {

/// How the proximal weights lambda_k are generated.
enum class LambdaRule {
  /// lambda_k = lambda for every k.
  constant,
  /// lambda_k taken from an explicit finite list (flagged: the sum of 1/lambda_k stays finite).
  explicit_list,
  /// lambda_k chosen so that omega_k = omega_start * omega_ratio^(k-1).
  geometric,
};

struct PpmConfig {
  LambdaRule rule = LambdaRule::constant;
  double lambda = 1.0;
  std::vector<double> lambdas;
  double omega_start = 1.0;
  double omega_ratio = 0.5;
  int max_steps = 1000;
  double subproblem_tolerance = 1e-10;
  /// The trajectory stops before emitting a point with omega_k < omega_min.
  double omega_min = 1e-6;
};

/// Throws ValidationError on an unusable configuration.
void validate_ppm_config(const PpmConfig& cfg);

/// lambda_k for k = 0, 1, ... (k must be below the list length for explicit lists).
double lambda_at(const PpmConfig& cfg, int k);

/// omega_k = 1 / sum_{j<k} 1/lambda_j for k = 1..lambdas.size().
std::vector<double> omega_schedule(const std::vector<double>& lambdas);

/// Stationarity-matched radius 2 omega sqrt(x' Sigma x).
double alpha_of_omega(const Vector& x_omega, double omega, const SpdMatrix& sigma);

struct Trajectory {
  Vector start;
  /// Points k = 1, 2, ...; each carries step, omega, alpha(omega), E and R.
  std::vector<FrontierPoint> points;
  PpmConfig config;
  Provenance provenance = Provenance::ppm;
  double eval_radius = 0.0;
  std::vector<double> lambdas;
  /// Set for explicit finite lambda lists.
  bool finite_schedule_warning = false;
  /// Largest subproblem residual seen along the run.
  double max_residual = 0.0;
};

/// x_{k+1} = argmin <a0, x> + lambda_k (x - x_k)' Sigma (x - x_k) over D.
SubproblemSolution ppm_step(const Vector& x_k, double lambda_k, const Vector& a0, const SpdMatrix& sigma,
                            const DomainSpec& d, const WarmStart* warm = nullptr);

/// The minimum-variance point of D (the infinite-radius end of the frontier).
Vector most_robust_start(const Vector& a0, const SpdMatrix& sigma, const DomainSpec& d);

/// Proximal point trajectory from the most robust point. `on_point`, if set,
/// sees each point as soon as it is produced. Points whose iterate has zero
/// variance report alpha = +inf.
Trajectory run_ppm_trajectory(const Vector& a0, const SpdMatrix& sigma, const DomainSpec& d, const PpmConfig& cfg,
                              double alpha_eval,
                              const std::function<void(const FrontierPoint&)>& on_point = nullptr);

/// A PPM point next to the exact solution at its own radius alpha(omega_k).
struct MatchedPoint {
  FrontierPoint ppm;
  FrontierPoint exact;
  /// ||x_ppm - x_exact||_inf
  double matching_error = 0.0;
  double efficiency_gap = 0.0;
  double robustness_gap = 0.0;
};

struct FrontierComparison {
  Trajectory trajectory;
  std::vector<MatchedPoint> points;
  /// PPM points with infinite alpha have no exact counterpart and are skipped.
  int skipped = 0;
  double max_matching_error = 0.0;
  double max_efficiency_gap = 0.0;
  double max_robustness_gap = 0.0;
};

/// Runs the trajectory, then solves the mean-std problem exactly at every finite alpha(omega_k).
FrontierComparison compare_frontiers(const Vector& a0, const SpdMatrix& sigma, const DomainSpec& d,
                                     const PpmConfig& cfg, double alpha_eval);

/// argmin <a0, x> + omega (x - x0)' Sigma (x - x0) over D.
Vector central_path_point(double omega, const Vector& x0, const Vector& a0, const SpdMatrix& sigma,
                          const DomainSpec& d);

struct FirstOrderRun {
  std::vector<Vector> iterates;  // including the start
  /// The last step moved at least as far as the first one, or the objective rose.
  bool unstable = false;
};

/// Projected extra-gradient: y = P(x - s g(x)), x+ = P(x - s g(y)).
FirstOrderRun extragradient_trajectory(const convex::Objective& f, const DomainSpec& d, const Vector& start,
                                       double step, int iters);

/// Plain projected gradient x+ = P(x - s g(x)), for comparison runs.
FirstOrderRun projected_gradient_trajectory(const convex::Objective& f, const DomainSpec& d, const Vector& start,
                                            double step, int iters);

}  // namespace frontier
