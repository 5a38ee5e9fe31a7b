#include "cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <json.hpp>

#include "frontier/errors.hpp"
#include "frontier/instrumentation.hpp"
#include "frontier/portfolio.hpp"
#include "frontier/ppm.hpp"
#include "frontier/saddle.hpp"
#include "frontier/sandwich.hpp"

namespace frontier::cli {

namespace {

using Json = nlohmann::ordered_json;

const std::vector<std::string> kOutputKeys{"out", "format", "seed"};
const std::vector<std::string> kInstanceKeys{"instance", "n",       "sigma",     "returns", "assets", "periods",
                                             "factors",  "in_sample", "ridge",   "domain",  "cap",    "lower",
                                             "upper",    "cash_lower", "cash_upper"};
const std::vector<std::string> kPpmKeys{"lambda_rule", "lambda", "lambdas",  "omega_start",
                                        "omega_ratio", "steps",  "omega_min", "tolerance"};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<std::vector<std::string>> key_groups;
  std::vector<std::string> extra_keys;

  std::set<std::string> keys() const {
    std::set<std::string> out(extra_keys.begin(), extra_keys.end());
    for (const auto& g : key_groups) out.insert(g.begin(), g.end());
    return out;
  }
};

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> specs{
      {"frontier-exact", "exact mean-std solves over an alpha grid", {kOutputKeys, kInstanceKeys}, {"alphas", "alpha_eval"}},
      {"frontier-ppm", "proximal point trajectory from the most robust point", {kOutputKeys, kInstanceKeys, kPpmKeys},
       {"alpha_eval"}},
      {"compare", "PPM trajectory against exact solves at the same radii", {kOutputKeys, kInstanceKeys, kPpmKeys},
       {"alpha_eval"}},
      {"saddle", "saddle oracle on a random RCWUC instance, mapped to the norm form", {kOutputKeys},
       {"n", "m", "alphas", "alpha_max", "iters", "step_lambda", "step_decay"}},
      {"sandwich", "random-polyhedron sandwich experiment", {kOutputKeys},
       {"m", "n", "b", "d_bar", "trials", "alphas"}},
      {"portfolio", "in-sample PPM and exact frontiers with out-of-sample evaluation",
       {kOutputKeys, kInstanceKeys, kPpmKeys}, {"alpha_eval"}},
  };
  return specs;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

/// Flat key = value lines; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

class Settings {
 public:
  Settings(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? values_.at(key) : fallback;
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_real(key, values_.at(key));
  }

  long integer(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    const std::string& s = values_.at(key);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw UsageError("--" + key + ": '" + s + "' is not an integer");
    }
    return v;
  }

  std::uint64_t seed(std::uint64_t fallback) const {
    if (!has("seed")) return fallback;
    const std::string& s = values_.at("seed");
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw UsageError("--seed: '" + s + "' is not a nonnegative integer");
    }
    return v;
  }

  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    std::stringstream ss(values_.at(key));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
    if (out.empty()) throw UsageError("--" + key + ": empty list");
    return out;
  }

 private:
  static double parse_real(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw UsageError("--" + key + ": '" + s + "' is not a finite number");
    }
    return v;
  }

  std::map<std::string, std::string> values_;
};

int positive_int(const Settings& s, const std::string& key, long fallback) {
  const long v = s.integer(key, fallback);
  if (v < 1 || v > std::numeric_limits<int>::max()) throw UsageError("--" + key + " must be a positive integer");
  return static_cast<int>(v);
}

int thread_cap() {
  const char* env = std::getenv("FRONTIER_PPM_THREADS");
  if (env == nullptr || *env == '\0') return std::max(1u, std::thread::hardware_concurrency());
  const std::string s(env);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) {
    throw UsageError("FRONTIER_PPM_THREADS must be a positive integer");
  }
  return v;
}

// Instance construction ----------------------------------------------------

struct Instance {
  Vector a0;
  SpdMatrix sigma = SpdMatrix::identity(1);
  DomainSpec domain;
  std::optional<MomentEstimate> in_sample;
  std::optional<MomentEstimate> out_of_sample;
  Json meta = Json::object();
};

DomainSpec make_domain(const Settings& s, Eigen::Index n) {
  const std::string kind = s.text("domain", "simplex");
  DomainSpec d;
  if (kind == "simplex") {
    d = Simplex{n};
  } else if (kind == "scaled_simplex") {
    d = ScaledSimplex{n, s.real("cap", 1.0)};
  } else if (kind == "box_simplex") {
    d = BoxSimplex{Vector::Constant(n, s.real("lower", 0.0)), Vector::Constant(n, s.real("upper", 1.0)),
                   s.real("cash_lower", 0.0), s.real("cash_upper", 0.0)};
  } else {
    throw UsageError("--domain: expected simplex, scaled_simplex or box_simplex, got '" + kind + "'");
  }
  validate_domain(d);
  return d;
}

Instance make_instance(const Settings& s, std::uint64_t seed, const std::string& default_source) {
  Instance inst;
  const std::string source = s.text("instance", default_source);
  inst.meta["instance"] = source;
  if (source == "random") {
    const int n = positive_int(s, "n", 5);
    const std::string kind = s.text("sigma", "diagonal");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    std::uniform_real_distribution<double> spread(0.5, 2.0);
    inst.a0.resize(n);
    for (int i = 0; i < n; ++i) inst.a0(i) = sym(rng);
    if (kind == "diagonal") {
      Vector u(n);
      for (int i = 0; i < n; ++i) u(i) = spread(rng);
      inst.sigma = SpdMatrix::diagonal(u);
    } else if (kind == "dense") {
      Matrix g(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) g(i, j) = sym(rng);
      }
      inst.sigma = SpdMatrix(g * g.transpose() / n + 0.1 * Matrix::Identity(n, n));
    } else {
      throw UsageError("--sigma: expected diagonal or dense, got '" + kind + "'");
    }
    inst.meta["n"] = n;
    inst.meta["sigma"] = kind;
  } else if (source == "synthetic" || source == "csv") {
    ReturnsMatrix r;
    if (source == "csv") {
      if (!s.has("returns")) throw UsageError("--returns is required with instance = csv");
      r = load_returns_csv(s.text("returns", ""));
      inst.meta["returns"] = s.text("returns", "");
    } else {
      FactorModelConfig f;
      f.assets = positive_int(s, "assets", f.assets);
      f.periods = positive_int(s, "periods", f.periods);
      f.factors = static_cast<long>(s.integer("factors", f.factors));
      f.seed = seed;
      r = synthetic_factor_returns(f);
      inst.meta["assets"] = f.assets;
      inst.meta["periods"] = f.periods;
      inst.meta["factors"] = f.factors;
    }
    const double fraction = s.real("in_sample", 2.0 / 3.0);
    if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("--in_sample must lie strictly between 0 and 1");
    const auto split = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(r.periods())));
    if (split < 2 || r.periods() - split < 2) throw TooFewRows("each sample needs at least 2 rows");
    std::optional<double> ridge;
    if (s.has("ridge")) ridge = s.real("ridge", 0.0);
    inst.in_sample = estimate_moments(slice_periods(r, 0, split), ridge);
    inst.out_of_sample = estimate_moments(slice_periods(r, split, r.periods()), ridge);
    inst.a0 = -inst.in_sample->mean;
    inst.sigma = inst.in_sample->cov;
    inst.meta["in_sample_rows"] = split;
    inst.meta["out_of_sample_rows"] = r.periods() - split;
    inst.meta["regularization_in"] = inst.in_sample->regularization;
    inst.meta["regularization_out"] = inst.out_of_sample->regularization;
  } else {
    throw UsageError("--instance: expected random, synthetic or csv, got '" + source + "'");
  }
  inst.domain = make_domain(s, inst.a0.size());
  inst.meta["domain"] = s.text("domain", "simplex");
  return inst;
}

PpmConfig make_ppm_config(const Settings& s, const PpmConfig& defaults) {
  PpmConfig cfg = defaults;
  const std::string rule = s.text("lambda_rule", defaults.rule == LambdaRule::geometric ? "geometric" : "constant");
  if (rule == "constant") {
    cfg.rule = LambdaRule::constant;
  } else if (rule == "geometric") {
    cfg.rule = LambdaRule::geometric;
  } else if (rule == "list") {
    cfg.rule = LambdaRule::explicit_list;
    if (!s.has("lambdas")) throw UsageError("--lambdas is required with lambda_rule = list");
  } else {
    throw UsageError("--lambda_rule: expected constant, geometric or list, got '" + rule + "'");
  }
  cfg.lambda = s.real("lambda", cfg.lambda);
  cfg.lambdas = s.reals("lambdas", {});
  cfg.omega_start = s.real("omega_start", cfg.omega_start);
  cfg.omega_ratio = s.real("omega_ratio", cfg.omega_ratio);
  cfg.max_steps = positive_int(s, "steps", cfg.max_steps);
  cfg.omega_min = s.real("omega_min", cfg.omega_min);
  cfg.subproblem_tolerance = s.real("tolerance", cfg.subproblem_tolerance);
  validate_ppm_config(cfg);
  return cfg;
}

std::string rule_name(LambdaRule r) {
  switch (r) {
    case LambdaRule::constant:
      return "constant";
    case LambdaRule::explicit_list:
      return "list";
    case LambdaRule::geometric:
      return "geometric";
  }
  return "unknown";
}

Json ppm_meta(const PpmConfig& cfg) {
  Json j;
  j["lambda_rule"] = rule_name(cfg.rule);
  if (cfg.rule == LambdaRule::constant) j["lambda"] = cfg.lambda;
  if (cfg.rule == LambdaRule::explicit_list) j["lambdas"] = cfg.lambdas;
  if (cfg.rule == LambdaRule::geometric) {
    j["omega_start"] = cfg.omega_start;
    j["omega_ratio"] = cfg.omega_ratio;
  }
  j["steps"] = cfg.max_steps;
  j["omega_min"] = cfg.omega_min;
  return j;
}

// Records ------------------------------------------------------------------

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// -(cost + alpha_eval * std) at a radius chosen after the run.
double robustness_at(const FrontierPoint& p, double alpha_eval) { return -(p.nominal_cost + alpha_eval * p.std_term); }

class RecordSink {
 public:
  RecordSink(std::string command, std::uint64_t seed, Json tolerances)
      : command_(std::move(command)), seed_(seed), tolerances_(std::move(tolerances)) {}

  void add(const std::string& kind, const Json& fields) {
    Json r;
    r["command"] = command_;
    r["schema_version"] = kSchemaVersion;
    r["seed"] = seed_;
    r["tolerances"] = tolerances_;
    r["record"] = kind;
    for (const auto& [k, v] : fields.items()) r[k] = v;
    records_.push_back(std::move(r));
  }

  const std::vector<Json>& records() const { return records_; }

 private:
  std::string command_;
  std::uint64_t seed_;
  Json tolerances_;
  std::vector<Json> records_;
};

// Command bodies -----------------------------------------------------------

double default_alpha_eval(const std::vector<FrontierPoint>& points) {
  double best = 0.0;
  for (const FrontierPoint& p : points) {
    if (std::isfinite(p.alpha)) best = std::max(best, p.alpha);
  }
  return best;
}

void run_frontier_exact(const Settings& s, std::uint64_t seed, RecordSink& sink, Json& meta) {
  const Instance inst = make_instance(s, seed, "random");
  const std::vector<double> alphas = s.reals("alphas", {0.0, 0.5, 1.0, 2.0, 4.0, 8.0});
  const double alpha_eval = s.real("alpha_eval", *std::max_element(alphas.begin(), alphas.end()));
  meta = inst.meta;
  meta["alpha_eval"] = alpha_eval;
  const FrontierSet f = sweep_exact_frontier(inst.a0, inst.sigma, alphas, inst.domain, alpha_eval);
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    const FrontierPoint& p = f.points[i];
    sink.add("point", {{"index", i},
                       {"provenance", to_string(f.provenance)},
                       {"alpha", p.alpha},
                       {"efficiency", p.efficiency},
                       {"robustness", p.robustness},
                       {"nominal_cost", p.nominal_cost},
                       {"std_term", p.std_term},
                       {"x", vector_json(p.x)}});
  }
  Json summary = meta;
  summary["points"] = f.points.size();
  sink.add("summary", summary);
}

void run_frontier_ppm(const Settings& s, std::uint64_t seed, RecordSink& sink, Json& meta) {
  const Instance inst = make_instance(s, seed, "random");
  const PpmConfig cfg = make_ppm_config(s, PpmConfig{});
  reset_solve_counters();
  const Trajectory t = run_ppm_trajectory(inst.a0, inst.sigma, inst.domain, cfg, 0.0);
  const SolveCounters counters = solve_counters();
  const double alpha_eval = s.real("alpha_eval", default_alpha_eval(t.points));
  meta = inst.meta;
  meta["ppm"] = ppm_meta(cfg);
  meta["alpha_eval"] = alpha_eval;
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    const FrontierPoint& p = t.points[i];
    sink.add("point", {{"step", *p.step},
                       {"provenance", to_string(t.provenance)},
                       {"lambda", t.lambdas[i]},
                       {"omega", *p.omega},
                       {"alpha", number_or_null(p.alpha)},
                       {"efficiency", p.efficiency},
                       {"robustness", robustness_at(p, alpha_eval)},
                       {"nominal_cost", p.nominal_cost},
                       {"std_term", p.std_term},
                       {"x", vector_json(p.x)}});
  }
  Json summary = meta;
  summary["points"] = t.points.size();
  summary["finite_schedule_warning"] = t.finite_schedule_warning;
  summary["min_variance_solves"] = counters.min_variance_solves;
  summary["prox_solves"] = counters.prox_solves;
  summary["max_subproblem_residual"] = t.max_residual;
  sink.add("summary", summary);
}

void run_compare(const Settings& s, std::uint64_t seed, RecordSink& sink, Json& meta, bool portfolio) {
  const Instance inst = make_instance(s, seed, portfolio ? "synthetic" : "random");
  PpmConfig defaults;
  if (portfolio) {
    defaults.rule = LambdaRule::geometric;
    defaults.omega_start = 20.0;
    defaults.omega_ratio = 0.6;
    defaults.max_steps = 10;
  }
  const PpmConfig cfg = make_ppm_config(s, defaults);
  const FrontierComparison c = compare_frontiers(inst.a0, inst.sigma, inst.domain, cfg, 0.0);
  const double alpha_eval = s.real("alpha_eval", default_alpha_eval(c.trajectory.points));
  meta = inst.meta;
  meta["ppm"] = ppm_meta(cfg);
  meta["alpha_eval"] = alpha_eval;
  if (inst.out_of_sample) meta["out_of_sample_sigma"] = "out_of_sample";

  double max_e = 0.0;
  double max_r = 0.0;
  for (const MatchedPoint& m : c.points) {
    const double r_ppm = robustness_at(m.ppm, alpha_eval);
    const double r_exact = robustness_at(m.exact, alpha_eval);
    max_e = std::max(max_e, m.efficiency_gap);
    max_r = std::max(max_r, std::abs(r_ppm - r_exact));
    Json rec{{"step", *m.ppm.step},
             {"omega", *m.ppm.omega},
             {"alpha", m.ppm.alpha},
             {"ppm_efficiency", m.ppm.efficiency},
             {"ppm_robustness", r_ppm},
             {"exact_efficiency", m.exact.efficiency},
             {"exact_robustness", r_exact},
             {"efficiency_gap", m.efficiency_gap},
             {"robustness_gap", std::abs(r_ppm - r_exact)},
             {"matching_error", m.matching_error}};
    if (inst.out_of_sample) {
      const OutOfSample op = evaluate_out_of_sample(m.ppm.x, *inst.out_of_sample, alpha_eval);
      const OutOfSample oe = evaluate_out_of_sample(m.exact.x, *inst.out_of_sample, alpha_eval);
      rec["oos_ppm_nominal"] = op.nominal_return;
      rec["oos_ppm_worst_case"] = op.worst_case_return;
      rec["oos_exact_nominal"] = oe.nominal_return;
      rec["oos_exact_worst_case"] = oe.worst_case_return;
    }
    rec["x_ppm"] = vector_json(m.ppm.x);
    rec["x_exact"] = vector_json(m.exact.x);
    sink.add("point", rec);
  }
  Json summary = meta;
  summary["points"] = c.points.size();
  summary["skipped_infinite_alpha"] = c.skipped;
  summary["max_matching_error"] = c.max_matching_error;
  summary["max_efficiency_gap"] = max_e;
  summary["max_robustness_gap"] = max_r;
  summary["max_subproblem_residual"] = c.trajectory.max_residual;
  sink.add("summary", summary);
}

RcwucInstance random_rcwuc(std::uint64_t seed, int n, int m, double alpha_max) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> margin(0.05, 0.5);
  Vector c0(n);
  for (int i = 0; i < n; ++i) c0(i) = sym(rng);
  Matrix c(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) c(i, j) = sym(rng);
  }
  Matrix g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = sym(rng);
  }
  const SpdMatrix sigma(g * g.transpose() / n + 0.1 * Matrix::Identity(n, n));
  const Vector center = Vector::Constant(n, 1.0 / n);
  const double q = quad_form(center, sigma);
  Vector b(m);
  for (int i = 0; i < m; ++i) b(i) = c.row(i).dot(center) + alpha_max * q + margin(rng);
  return RcwucInstance{c0, c, b, sigma};
}

void run_saddle(const Settings& s, std::uint64_t seed, RecordSink& sink, Json& meta) {
  const int n = positive_int(s, "n", 4);
  const int m = positive_int(s, "m", 3);
  const std::vector<double> alphas = s.reals("alphas", {0.1, 0.5, 1.0, 2.0});
  const double alpha_max = s.real("alpha_max", *std::max_element(alphas.begin(), alphas.end()));
  SaddleOptions opts;
  opts.iters = positive_int(s, "iters", opts.iters);
  opts.step_lambda = s.real("step_lambda", opts.step_lambda);
  opts.step_decay = s.real("step_decay", opts.step_decay);
  for (double a : alphas) {
    if (!(a >= 0.0)) throw UsageError("--alphas must be nonnegative");
  }
  const RcwucInstance inst = random_rcwuc(seed, n, m, alpha_max);
  validate_rcwuc(inst);
  meta = {{"n", n}, {"m", m}, {"alpha_max", alpha_max}, {"iters", opts.iters},
          {"step_lambda", opts.step_lambda}, {"step_decay", opts.step_decay}};
  double worst = 0.0;
  for (double alpha : alphas) {
    const SaddleState st = saddle_oracle(inst, alpha, opts);
    const double beta = beta_of_iterate(st.x, inst.sigma, alpha);
    const FrontierPoint direct = solve_rcwuc_direct(inst, beta);
    const double err = (st.x - direct.x).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    sink.add("point", {{"alpha", alpha},
                       {"beta", beta},
                       {"rounds", st.rounds},
                       {"gap_estimate", st.gap_estimate},
                       {"saddle_objective", inst.c0.dot(st.x)},
                       {"direct_objective", direct.nominal_cost},
                       {"matching_error", err},
                       {"lambda", vector_json(st.lambda)},
                       {"x_saddle", vector_json(st.x)},
                       {"x_direct", vector_json(direct.x)}});
  }
  Json summary = meta;
  summary["points"] = alphas.size();
  summary["max_matching_error"] = worst;
  sink.add("summary", summary);
}

void run_sandwich(const Settings& s, std::uint64_t seed, RecordSink& sink, Json& meta) {
  SandwichConfig cfg;
  cfg.m = positive_int(s, "m", cfg.m);
  cfg.n = positive_int(s, "n", cfg.n);
  cfg.bound_b = s.real("b", cfg.bound_b);
  cfg.mu = cfg.bound_b / 2.0;
  cfg.d_bar = s.real("d_bar", cfg.d_bar);
  cfg.trials = positive_int(s, "trials", cfg.trials);
  cfg.seed = seed;
  cfg.alphas = s.reals("alphas", cfg.alphas);
  validate_sandwich_config(cfg);
  const int threads = thread_cap();
  const SandwichFactors f = sandwich_factors(cfg);
  const SandwichObjective obj = sandwich_objective(cfg);
  const std::vector<SandwichTrial> trials = run_sandwich_experiment(cfg, obj.a0, obj.sigma, threads);
  meta = {{"m", cfg.m},          {"n", cfg.n},          {"b", cfg.bound_b},     {"mu", cfg.mu},
          {"d_bar", cfg.d_bar},  {"trials", cfg.trials}, {"alphas", cfg.alphas}, {"epsilon", f.epsilon},
          {"kappa", f.kappa},    {"inner_cap", f.inner_cap}};
  for (const SandwichTrial& t : trials) {
    Json per = Json::array();
    for (const SandwichAlphaResult& r : t.per_alpha) {
      per.push_back({{"alpha", r.alpha},
                     {"r_inner", r.r_inner},
                     {"r_poly", r.r_poly},
                     {"r_outer", r.r_outer},
                     {"ordering_holds", r.ordering_holds}});
    }
    sink.add("trial", {{"trial", t.trial_index},
                       {"epsilon", t.epsilon},
                       {"kappa", t.kappa},
                       {"inner_contained", t.inner_contained},
                       {"outer_contained", t.outer_contained},
                       {"max_total", t.max_total},
                       {"ordering_holds", t.ordering_holds()},
                       {"error", t.error ? Json(*t.error) : Json(nullptr)},
                       {"per_alpha", per}});
  }
  const SandwichSummary sum = summarize(cfg, trials);
  Json summary = meta;
  summary["failed"] = sum.failed;
  summary["ordering"] = sum.ordering;
  summary["ordering_frequency"] = sum.ordering_frequency;
  summary["containment"] = sum.containment;
  summary["containment_frequency"] = sum.containment_frequency;
  summary["containment_violations"] = sum.containment_violations;
  summary["hoeffding_floor"] = sum.hoeffding_floor;
  sink.add("summary", summary);
}

Json tolerances_for(const std::string& command, const Settings& s) {
  Json t;
  if (command == "sandwich") {
    t["ordering_slack"] = kOrderingSlack;
  } else if (command == "saddle") {
    t["divergence_bound"] = SaddleOptions{}.divergence_bound;
  } else {
    t["subproblem"] = s.real("tolerance", PpmConfig{}.subproblem_tolerance);
  }
  return t;
}

// Serialization -------------------------------------------------------------

void flatten(const std::string& prefix, const Json& v, std::vector<std::pair<std::string, std::string>>& out) {
  if (v.is_object()) {
    for (const auto& [k, child] : v.items()) flatten(prefix.empty() ? k : prefix + "." + k, child, out);
    return;
  }
  std::string cell;
  if (v.is_string()) {
    cell = v.get<std::string>();
  } else if (v.is_null()) {
    cell = "";
  } else if (v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number(); })) {
    for (std::size_t i = 0; i < v.size(); ++i) cell += (i ? ";" : "") + v[i].dump();
  } else {
    cell = v.dump();
  }
  out.emplace_back(prefix, cell);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_records(std::ostream& os, const std::vector<Json>& records, const std::string& format) {
  if (format == "jsonl") {
    for (const Json& r : records) os << r.dump() << '\n';
    return;
  }
  std::vector<std::vector<std::pair<std::string, std::string>>> rows;
  std::vector<std::string> columns;
  std::set<std::string> seen;
  for (const Json& r : records) {
    rows.emplace_back();
    flatten("", r, rows.back());
    for (const auto& [k, v] : rows.back()) {
      if (seen.insert(k).second) columns.push_back(k);
    }
  }
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << csv_escape(columns[c]);
  os << '\n';
  for (const auto& row : rows) {
    std::map<std::string, std::string> cells(row.begin(), row.end());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto it = cells.find(columns[c]);
      os << (c ? "," : "") << (it == cells.end() ? "" : csv_escape(it->second));
    }
    os << '\n';
  }
}

void write_atomically(const std::string& path, const std::vector<Json>& records, const std::string& format) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw UsageError("--out: cannot write " + tmp.string());
    write_records(os, records, format);
    os.flush();
    if (!os) {
      os.close();
      fs::remove(tmp);
      throw UsageError("--out: write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw UsageError("--out: cannot rename onto " + path + ": " + ec.message());
  }
}

/// The first `--name` after the subcommand that the subcommand does not accept.
std::optional<std::string> unknown_flag(const std::vector<std::string>& args) {
  const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind('-', 0) != 0; });
  if (sub == args.end()) return std::nullopt;
  const auto spec = std::find_if(commands().begin(), commands().end(),
                                 [&](const CommandSpec& c) { return c.name == *sub; });
  if (spec == commands().end()) return std::nullopt;
  const std::set<std::string> keys = spec->keys();
  for (auto it = std::next(sub); it != args.end(); ++it) {
    if (it->rfind("--", 0) != 0) continue;
    const std::string name = it->substr(2, it->find('=') == std::string::npos ? std::string::npos : it->find('=') - 2);
    if (name != "config" && name != "help" && keys.count(name) == 0) return "--" + name + " for " + spec->name;
  }
  return std::nullopt;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& stdout_stream, std::ostream& stderr_stream) {
  CLI::App app{"Efficiency-robustness frontiers by exact sweeps and proximal point trajectories", "frontier_ppm"};
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> flag_values;
  std::map<std::string, std::string> config_paths;
  for (const CommandSpec& spec : commands()) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    sub->add_option("--config", config_paths[spec.name], "flat key = value file; flags override it");
    for (const std::string& key : spec.keys()) sub->add_option("--" + key, flag_values[spec.name][key]);
  }

  if (const auto unknown = unknown_flag(args)) {
    stderr_stream << "usage error: unknown flag " << *unknown << '\n';
    return 1;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    stdout_stream << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    stdout_stream << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    stderr_stream << "usage error: " << e.what() << '\n';
    return 1;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  const CommandSpec& spec = *std::find_if(commands().begin(), commands().end(),
                                          [&](const CommandSpec& c) { return c.name == command; });
  try {
    std::map<std::string, std::string> merged;
    if (chosen->count("--config") > 0) {
      const std::set<std::string> allowed = spec.keys();
      for (const auto& [k, v] : read_config(config_paths[command])) {
        if (allowed.count(k) == 0) throw UsageError("unknown key '" + k + "' in config for " + command);
        merged[k] = v;
      }
    }
    for (const std::string& key : spec.keys()) {
      if (chosen->count("--" + key) > 0) merged[key] = flag_values[command][key];
    }
    const Settings settings(merged);
    const std::string format = settings.text("format", "jsonl");
    if (format != "jsonl" && format != "csv") throw UsageError("--format: expected jsonl or csv, got '" + format + "'");
    const std::uint64_t seed = settings.seed(7);

    RecordSink sink(command, seed, tolerances_for(command, settings));
    Json meta;
    if (command == "frontier-exact") {
      run_frontier_exact(settings, seed, sink, meta);
    } else if (command == "frontier-ppm") {
      run_frontier_ppm(settings, seed, sink, meta);
    } else if (command == "compare") {
      run_compare(settings, seed, sink, meta, false);
    } else if (command == "portfolio") {
      run_compare(settings, seed, sink, meta, true);
    } else if (command == "saddle") {
      run_saddle(settings, seed, sink, meta);
    } else {
      run_sandwich(settings, seed, sink, meta);
    }

    if (settings.has("out")) {
      write_atomically(settings.text("out", ""), sink.records(), format);
    } else {
      write_records(stdout_stream, sink.records(), format);
    }
    return 0;
  } catch (const ValidationError& e) {
    stderr_stream << command << ": " << e.what() << '\n';
    return 1;
  } catch (const SolverError& e) {
    stderr_stream << command << ": solver failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    stderr_stream << command << ": " << e.what() << '\n';
    return 2;
  }
}

}  // namespace frontier::cli
