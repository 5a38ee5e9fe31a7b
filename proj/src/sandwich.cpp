#include "frontier/sandwich.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "frontier/errors.hpp"
#include "frontier/robust_frontier.hpp"

namespace frontier {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double epsilon_of(const SandwichConfig& cfg) {
  return (cfg.bound_b / cfg.mu) * std::sqrt(std::log(static_cast<double>(cfg.m)) / static_cast<double>(cfg.n));
}

bool within(double lower, double upper) { return lower <= upper + kOrderingSlack * (1.0 + std::abs(upper)); }

/// Robustness at alpha_eval = alpha along an exact sweep over D.
std::vector<double> robustness_sweep(const Vector& a0, const SpdMatrix& sigma, const std::vector<double>& alphas,
                                     const DomainSpec& d) {
  const FrontierSet set = sweep_exact_frontier(a0, sigma, alphas, d, 0.0, true);
  std::vector<double> out;
  for (const FrontierPoint& p : set.points) out.push_back(-(p.nominal_cost + p.alpha * p.std_term));
  return out;
}

}  // namespace

SandwichFactors sandwich_factors(const SandwichConfig& cfg) {
  if (cfg.m < 1 || cfg.n < 1) throw ValidationError("m and n must be positive");
  if (!(cfg.bound_b > 0.0) || !(cfg.mu > 0.0) || !(cfg.d_bar > 0.0)) {
    throw ValidationError("b, mu and d_bar must be positive");
  }
  SandwichFactors f;
  f.epsilon = epsilon_of(cfg);
  if (!(f.epsilon < 1.0)) {
    const double ratio = cfg.bound_b / cfg.mu;
    const long minimal_n = static_cast<long>(std::floor(ratio * ratio * std::log(static_cast<double>(cfg.m)))) + 1;
    throw EpsilonTooLarge("epsilon = " + std::to_string(f.epsilon) + " is not below 1; need n >= " +
                              std::to_string(minimal_n),
                          f.epsilon, minimal_n);
  }
  f.inner_cap = cfg.d_bar / cfg.bound_b;
  f.kappa = cfg.bound_b / (cfg.mu * (1.0 - f.epsilon));
  return f;
}

void validate_sandwich_config(const SandwichConfig& cfg) {
  sandwich_factors(cfg);
  if (cfg.trials < 1) throw ValidationError("trials must be at least 1");
  if (cfg.alphas.empty()) throw ValidationError("alpha grid is empty");
  for (std::size_t i = 0; i < cfg.alphas.size(); ++i) {
    const double a = cfg.alphas[i];
    if (!(a >= 0.0) || !std::isfinite(a)) throw ValidationError("alphas must be finite and nonnegative");
    if (i > 0 && !(a > cfg.alphas[i - 1])) throw ValidationError("alphas must be strictly increasing");
  }
}

double counter_uniform(std::uint64_t seed, std::uint64_t trial, std::uint64_t row, std::uint64_t col) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ trial);
  h = mix64(h ^ row);
  h = mix64(h ^ col);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Polyhedron sample_random_polyhedron(const SandwichConfig& cfg, int trial_index) {
  Polyhedron p;
  p.a.resize(cfg.m, cfg.n);
  for (long r = 0; r < cfg.m; ++r) {
    for (long c = 0; c < cfg.n; ++c) {
      p.a(r, c) = cfg.bound_b * counter_uniform(cfg.seed, static_cast<std::uint64_t>(trial_index),
                                                 static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c));
    }
  }
  p.d = Vector::Constant(cfg.m, cfg.d_bar);
  return p;
}

bool SandwichTrial::ordering_holds() const {
  if (error || per_alpha.empty()) return false;
  return std::all_of(per_alpha.begin(), per_alpha.end(), [](const SandwichAlphaResult& r) { return r.ordering_holds; });
}

namespace {

struct SimplexBounds {
  std::vector<double> inner;
  std::vector<double> outer;
};

SimplexBounds simplex_bounds(const SandwichConfig& cfg, const Vector& a0, const SpdMatrix& sigma,
                             const SandwichFactors& f) {
  return {robustness_sweep(a0, sigma, cfg.alphas, ScaledSimplex{cfg.n, f.inner_cap}),
          robustness_sweep(a0, sigma, cfg.alphas, ScaledSimplex{cfg.n, f.kappa * f.inner_cap})};
}

std::vector<SandwichAlphaResult> against(const std::vector<double>& alphas, const SimplexBounds& bounds,
                                         const std::vector<double>& poly) {
  std::vector<SandwichAlphaResult> out;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    SandwichAlphaResult r;
    r.alpha = alphas[i];
    r.r_inner = bounds.inner[i];
    r.r_poly = poly[i];
    r.r_outer = bounds.outer[i];
    r.ordering_holds = within(r.r_inner, r.r_poly) && within(r.r_poly, r.r_outer);
    out.push_back(r);
  }
  return out;
}

SandwichTrial trial_against(const SandwichConfig& cfg, const Vector& a0, const SpdMatrix& sigma, int trial_index,
                            const SandwichFactors& f, const SimplexBounds& bounds) {
  SandwichTrial t;
  t.seed = cfg.seed;
  t.trial_index = trial_index;
  t.epsilon = f.epsilon;
  t.kappa = f.kappa;
  t.polyhedron = sample_random_polyhedron(cfg, trial_index);
  t.inner_contained = t.polyhedron.a.maxCoeff() <= cfg.bound_b;
  try {
    t.max_total = -nominal_minimize(-Vector::Ones(cfg.n), t.polyhedron).objective_value;
    t.outer_contained = t.max_total <= f.kappa * f.inner_cap * (1.0 + 1e-12);
    t.per_alpha = against(cfg.alphas, bounds, robustness_sweep(a0, sigma, cfg.alphas, t.polyhedron));
  } catch (const SolverError& e) {
    t.per_alpha.clear();
    t.error = e.what();
  }
  return t;
}

}  // namespace

SandwichObjective sandwich_objective(const SandwichConfig& cfg) {
  // Row indices past any polyhedron row keep these draws apart from the matrix entries.
  const std::uint64_t row = ~std::uint64_t{0};
  Vector a0(cfg.n);
  Vector d(cfg.n);
  for (long j = 0; j < cfg.n; ++j) {
    a0(j) = -counter_uniform(cfg.seed, row, 0, static_cast<std::uint64_t>(j));
    d(j) = 0.5 + 1.5 * counter_uniform(cfg.seed, row, 1, static_cast<std::uint64_t>(j));
  }
  return {a0, SpdMatrix::diagonal(d)};
}

std::vector<SandwichAlphaResult> compare_with_simplices(const SandwichConfig& cfg, const Vector& a0,
                                                        const SpdMatrix& sigma, const Polyhedron& poly) {
  validate_sandwich_config(cfg);
  const SandwichFactors f = sandwich_factors(cfg);
  return against(cfg.alphas, simplex_bounds(cfg, a0, sigma, f), robustness_sweep(a0, sigma, cfg.alphas, poly));
}

SandwichTrial run_sandwich_trial(const SandwichConfig& cfg, const Vector& a0, const SpdMatrix& sigma,
                                 int trial_index) {
  validate_sandwich_config(cfg);
  const SandwichFactors f = sandwich_factors(cfg);
  return trial_against(cfg, a0, sigma, trial_index, f, simplex_bounds(cfg, a0, sigma, f));
}

std::vector<SandwichTrial> run_sandwich_experiment(const SandwichConfig& cfg, const Vector& a0,
                                                   const SpdMatrix& sigma, int threads) {
  validate_sandwich_config(cfg);
  require_same_dim(a0.size(), cfg.n, "sandwich a0");
  require_same_dim(sigma.dim(), cfg.n, "sandwich Sigma");
  const SandwichFactors f = sandwich_factors(cfg);
  const SimplexBounds bounds = simplex_bounds(cfg, a0, sigma, f);
  std::vector<SandwichTrial> out(static_cast<std::size_t>(cfg.trials));
  const int workers = std::max(1, std::min(threads, cfg.trials));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < cfg.trials; i = next++) {
      out[static_cast<std::size_t>(i)] = trial_against(cfg, a0, sigma, i, f, bounds);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return out;
}

SandwichSummary summarize(const SandwichConfig& cfg, const std::vector<SandwichTrial>& trials) {
  SandwichSummary s;
  s.trials = static_cast<int>(trials.size());
  for (const SandwichTrial& t : trials) {
    if (t.error) ++s.failed;
    const bool ordered = t.ordering_holds();
    if (ordered) ++s.ordering;
    if (t.containment()) {
      ++s.containment;
      if (!ordered) ++s.containment_violations;
    }
  }
  if (s.trials > 0) {
    s.ordering_frequency = static_cast<double>(s.ordering) / s.trials;
    s.containment_frequency = static_cast<double>(s.containment) / s.trials;
    s.hoeffding_floor = 1.0 - 1.0 / static_cast<double>(cfg.m) -
                        2.0 * std::sqrt(std::log(20.0) / (2.0 * static_cast<double>(s.trials)));
  }
  return s;
}

}  // namespace frontier
