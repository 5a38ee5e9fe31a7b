#pragma once

#include <optional>
#include <string>
#include <vector>

#include "frontier/domains.hpp"
#include "frontier/linalg.hpp"

namespace frontier {

/// {xi : ||Sigma^{-1/2} xi||_2 <= radius}.
struct EllipsoidalSet {
  SpdMatrix shape;
  double radius = 0.0;
};

/// Smoothing used when the domain contains the origin.
inline constexpr double kStdSmoothing = 1e-12;

struct FrontierPoint {
  /// Uncertainty radius; +inf for the unconstrained-budget point of the
  /// epsilon-constraint form.
  double alpha = 0.0;
  std::optional<double> omega;
  std::optional<int> step;
  Vector x;
  double efficiency = 0.0;    // -<a0, x>
  double robustness = 0.0;    // -(<a0, x> + alpha_eval * std_term)
  double nominal_cost = 0.0;  // <a0, x>
  double std_term = 0.0;      // sqrt(x' Sigma x)
  double upsilon = 0.0;       // nominal-cost level of this point
};

enum class Provenance { exact, ppm, extragradient, saddle };
std::string to_string(Provenance p);

struct FrontierSet {
  std::vector<FrontierPoint> points;
  double eval_radius = 0.0;
  Provenance provenance = Provenance::exact;
};

struct Evaluation {
  double efficiency = 0.0;
  double robustness = 0.0;
};

/// <a0, x> + alpha * sqrt(x' Sigma x): the largest <a0 + xi, x> over the set.
double worst_case_value(const Vector& x, const Vector& a0, const EllipsoidalSet& u);
/// The maximizing perturbation alpha * Sigma x / sqrt(x' Sigma x) (zero at x = 0).
Vector worst_case_perturbation(const Vector& x, const EllipsoidalSet& u);

Evaluation evaluate_point(const Vector& x, const Vector& a0, const SpdMatrix& sigma, double alpha_eval);

/// Builds a fully annotated frontier point for x.
FrontierPoint make_frontier_point(double alpha, const Vector& x, const Vector& a0, const SpdMatrix& sigma,
                                  double alpha_eval);

/// argmin <a0, x> + alpha sqrt(x' Sigma x) over D, as a raw subproblem solution.
SubproblemSolution solve_mean_std(const Vector& a0, const SpdMatrix& sigma, double alpha, const DomainSpec& d,
                                  const WarmStart* warm = nullptr);

/// Pareto-efficient robust solution at radius u.radius, with robustness
/// reported at `alpha_eval` (defaults to u.radius).
FrontierPoint solve_pareto_exact(const Vector& a0, const EllipsoidalSet& u, const DomainSpec& d,
                                 std::optional<double> alpha_eval = std::nullopt);

/// One exact solve per alpha (strictly increasing, nonnegative). The solves are
/// independent unless `continuation` is set, in which case each one starts from
/// the previous solution and active set.
FrontierSet sweep_exact_frontier(const Vector& a0, const SpdMatrix& sigma, const std::vector<double>& alphas,
                                 const DomainSpec& d, double alpha_eval, bool continuation = false);

/// argmin sqrt(x' Sigma x) s.t. <a0, x> <= upsilon, x in D. The returned
/// point's alpha is the radius whose mean-std problem shares this solution
/// (+inf when the budget is slack).
FrontierPoint solve_pe_epsilon_constraint(double upsilon, const Vector& a0, const SpdMatrix& sigma,
                                          const DomainSpec& d, double alpha_eval = 0.0);

}  // namespace frontier
