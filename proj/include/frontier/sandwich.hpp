#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frontier/domains.hpp"
#include "frontier/linalg.hpp"

namespace frontier {

/// Random polyhedra {x >= 0 : A x <= d_bar e} with A_ij ~ uniform[0, b].
struct SandwichConfig {
  long m = 50;
  long n = 200;
  double bound_b = 1.0;
  double d_bar = 1.0;
  /// Mean of the entry distribution; b / 2 for the uniform entries drawn here.
  double mu = 0.5;
  int trials = 200;
  std::uint64_t seed = 7;
  std::vector<double> alphas{0.1, 0.5, 1.0, 2.0};
};

struct SandwichFactors {
  double epsilon = 0.0;
  /// Cap of the inner simplex {x >= 0 : <e,x> <= d_bar / b}.
  double inner_cap = 0.0;
  double kappa = 0.0;
};

/// epsilon = (b/mu) sqrt(ln m / n), inner_cap = d_bar / b, kappa = b / (mu (1 - epsilon)).
/// Throws EpsilonTooLarge when epsilon >= 1.
SandwichFactors sandwich_factors(const SandwichConfig& cfg);

/// Throws ValidationError (or EpsilonTooLarge) on an unusable configuration.
void validate_sandwich_config(const SandwichConfig& cfg);

/// Uniform [0, 1) draw that depends only on (seed, trial, row, col).
double counter_uniform(std::uint64_t seed, std::uint64_t trial, std::uint64_t row, std::uint64_t col);

Polyhedron sample_random_polyhedron(const SandwichConfig& cfg, int trial_index);

struct SandwichAlphaResult {
  double alpha = 0.0;
  double r_inner = 0.0;
  double r_poly = 0.0;
  double r_outer = 0.0;
  bool ordering_holds = false;
};

struct SandwichTrial {
  std::uint64_t seed = 0;
  int trial_index = 0;
  Polyhedron polyhedron;
  double epsilon = 0.0;
  double kappa = 0.0;
  /// inner simplex inside the polyhedron (every entry at most b)
  bool inner_contained = false;
  /// max <e, x> over the polyhedron
  double max_total = 0.0;
  /// polyhedron inside the kappa-scaled simplex
  bool outer_contained = false;
  std::vector<SandwichAlphaResult> per_alpha;
  /// Solver failure for this trial; per_alpha is then empty.
  std::optional<std::string> error;

  bool containment() const { return inner_contained && outer_contained; }
  bool ordering_holds() const;
};

/// Slack allowed in the robustness comparisons.
inline constexpr double kOrderingSlack = 1e-7;

/// Default objective for the experiment: a0_j uniform on [-1, 0], Sigma diagonal with entries uniform on [0.5, 2],
/// both drawn from the counter generator under cfg.seed.
struct SandwichObjective {
  Vector a0;
  SpdMatrix sigma;
};
SandwichObjective sandwich_objective(const SandwichConfig& cfg);

/// R at alpha_eval = alpha on the inner simplex, on `poly` and on the kappa-scaled simplex, for every alpha of cfg.
std::vector<SandwichAlphaResult> compare_with_simplices(const SandwichConfig& cfg, const Vector& a0,
                                                        const SpdMatrix& sigma, const Polyhedron& poly);

/// Runs one trial: R at alpha_eval = alpha on the inner simplex, the sampled polyhedron and the kappa-scaled simplex.
SandwichTrial run_sandwich_trial(const SandwichConfig& cfg, const Vector& a0, const SpdMatrix& sigma,
                                 int trial_index);

/// Trials 0..trials-1, spread over up to `threads` workers; results are ordered by trial index.
std::vector<SandwichTrial> run_sandwich_experiment(const SandwichConfig& cfg, const Vector& a0,
                                                   const SpdMatrix& sigma, int threads = 1);

struct SandwichSummary {
  int trials = 0;
  int failed = 0;
  int ordering = 0;
  int containment = 0;
  /// Trials with containment but a broken ordering.
  int containment_violations = 0;
  double ordering_frequency = 0.0;
  double containment_frequency = 0.0;
  /// 1 - 1/m - 2 sqrt(ln 20 / (2 trials)).
  double hoeffding_floor = 0.0;
};

SandwichSummary summarize(const SandwichConfig& cfg, const std::vector<SandwichTrial>& trials);

}  // namespace frontier
