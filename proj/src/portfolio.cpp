#include "frontier/portfolio.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <random>
#include <set>
#include <sstream>

#include "frontier/errors.hpp"

namespace frontier {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string where(long line, std::size_t column, const std::string& name) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column + 1) + " (" + name + ")";
}

std::optional<std::chrono::year_month_day> parse_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  const char* p = s.data();
  if (std::from_chars(p, p + 4, y).ptr != p + 4) return std::nullopt;
  if (std::from_chars(p + 5, p + 7, m).ptr != p + 7) return std::nullopt;
  if (std::from_chars(p + 8, p + 10, d).ptr != p + 10) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

std::string format_date(const std::chrono::year_month_day& ymd) {
  std::ostringstream os;
  os << std::setfill('0') << std::setw(4) << static_cast<int>(ymd.year()) << '-' << std::setw(2)
     << static_cast<unsigned>(ymd.month()) << '-' << std::setw(2) << static_cast<unsigned>(ymd.day());
  return os.str();
}

}  // namespace

ReturnsMatrix parse_returns_csv(std::istream& in) {
  std::string line;
  long line_no = 0;
  ReturnsMatrix out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) break;
  }
  if (line_no == 0 || trim(line).empty()) throw ParseError("empty returns file");
  const std::vector<std::string> header = split_commas(line);
  if (header.front() != "date") throw ParseError(where(line_no, 0, header.front()) + ": header must start with 'date'");
  if (header.size() < 2) throw ParseError("header names no tickers");
  const std::size_t n = header.size() - 1;
  if (static_cast<long>(n) > kMaxCsvCells) throw FileTooLarge("more than 1e7 cells");
  std::set<std::string> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].empty()) throw ParseError(where(line_no, c, "header") + ": empty ticker");
    if (!seen.insert(header[c]).second) throw ParseError(where(line_no, c, header[c]) + ": duplicate ticker");
    out.tickers.push_back(header[c]);
  }

  std::vector<double> cells;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> row = split_commas(line);
    if (row.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " cells, found " + std::to_string(row.size()));
    }
    if (!parse_iso_date(row[0])) throw ParseError(where(line_no, 0, "date") + ": not a YYYY-MM-DD date");
    if (!out.dates.empty() && !(row[0] > out.dates.back())) {
      throw NonMonotoneDates("line " + std::to_string(line_no) + ": date " + row[0] + " does not follow " +
                             out.dates.back());
    }
    if (static_cast<long>(cells.size() + n) > kMaxCsvCells) throw FileTooLarge("more than 1e7 cells");
    out.dates.push_back(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) {
      const std::string& s = row[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ParseError(where(line_no, c, out.tickers[c - 1]) + ": '" + s + "' is not a number");
      }
      cells.push_back(v);
    }
  }
  if (out.dates.size() < 2) throw TooFewRows("need at least 2 return rows, found " + std::to_string(out.dates.size()));
  const auto t = static_cast<Eigen::Index>(out.dates.size());
  out.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cells.data(), t, static_cast<Eigen::Index>(n));
  return out;
}

ReturnsMatrix load_returns_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open returns file " + path);
  return parse_returns_csv(in);
}

void write_returns_csv(std::ostream& out, const ReturnsMatrix& r) {
  out << "date";
  for (const std::string& t : r.tickers) out << ',' << t;
  out << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < r.periods(); ++i) {
    out << r.dates[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < r.assets(); ++j) out << ',' << r.values(i, j);
    out << '\n';
  }
}

ReturnsMatrix slice_periods(const ReturnsMatrix& r, Eigen::Index begin, Eigen::Index end) {
  if (begin < 0 || end > r.periods() || begin >= end) throw ValidationError("period slice out of range");
  ReturnsMatrix out;
  out.tickers = r.tickers;
  out.dates.assign(r.dates.begin() + begin, r.dates.begin() + end);
  out.values = r.values.middleRows(begin, end - begin);
  return out;
}

MomentEstimate estimate_moments(const ReturnsMatrix& r, std::optional<double> ridge) {
  const Eigen::Index t = r.periods();
  const Eigen::Index n = r.assets();
  if (t < 2) throw TooFewRows("need at least 2 return rows");
  require_same_dim(static_cast<Eigen::Index>(r.tickers.size()), n, "ticker count");
  if (ridge && (!(*ridge >= 0.0) || !std::isfinite(*ridge))) throw ValidationError("ridge must be finite and >= 0");

  // Welford updates.
  Vector mean = Vector::Zero(n);
  Matrix m2 = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < t; ++i) {
    const Vector x = r.values.row(i).transpose();
    const Vector before = x - mean;
    mean += before / static_cast<double>(i + 1);
    m2.noalias() += before * (x - mean).transpose();
  }
  Matrix cov = 0.5 * (m2 + m2.transpose()) / static_cast<double>(t - 1);

  const double trace_scale = cov.trace() / static_cast<double>(n);
  const double pd_tol = kCovariancePdTolerance * trace_scale;
  auto attempt = [&](double added) -> std::optional<SpdMatrix> {
    try {
      return SpdMatrix(cov + added * Matrix::Identity(n, n), std::max(pd_tol, 0.0));
    } catch (const NotPositiveDefinite&) {
      return std::nullopt;
    }
  };
  double added = ridge.value_or(0.0);
  std::optional<SpdMatrix> spd = attempt(added);
  if (!spd && !ridge) {
    added = 1e-8 * trace_scale;
    if (added > 0.0) spd = attempt(added);
  }
  if (!spd) {
    throw DegenerateCovariance("sample covariance is not positive definite (ridge " + std::to_string(added) +
                               "); check for constant or collinear columns");
  }
  return {mean, *spd, static_cast<long>(t), added};
}

OutOfSample evaluate_out_of_sample(const Vector& x, const MomentEstimate& m, double alpha_eval) {
  require_same_dim(x.size(), m.mean.size(), "evaluate_out_of_sample");
  const Evaluation e = evaluate_point(x, -m.mean, m.cov, alpha_eval);
  return {e.efficiency, e.robustness};
}

ReturnsMatrix synthetic_factor_returns(const FactorModelConfig& cfg) {
  if (cfg.assets < 1 || cfg.periods < 2 || cfg.factors < 0) throw ValidationError("bad factor-model dimensions");
  const auto start = parse_iso_date(cfg.first_date);
  if (!start) throw ValidationError("first_date must be YYYY-MM-DD");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const Eigen::Index n = cfg.assets;
  const Eigen::Index k = cfg.factors;

  Vector mu(n);
  Vector idio(n);
  Matrix loadings(n, k);
  const double factor_vol = 0.01;
  for (Eigen::Index j = 0; j < n; ++j) {
    idio(j) = 0.008 + 0.012 * uniform(rng);
    for (Eigen::Index f = 0; f < k; ++f) loadings(j, f) = (f == 0 ? 0.6 : 0.0) + 0.4 * normal(rng);
    // Expected return grows with total volatility (daily Sharpe ratio 0.02 to 0.06).
    const double vol = std::sqrt(factor_vol * factor_vol * loadings.row(j).squaredNorm() + idio(j) * idio(j));
    mu(j) = vol * (0.02 + 0.04 * uniform(rng));
  }

  ReturnsMatrix out;
  for (Eigen::Index j = 0; j < n; ++j) {
    std::ostringstream name;
    name << "A" << std::setfill('0') << std::setw(2) << j + 1;
    out.tickers.push_back(name.str());
  }
  out.values.resize(cfg.periods, n);
  Vector factor(k);
  std::chrono::sys_days day{*start};
  for (Eigen::Index i = 0; i < cfg.periods; ++i) {
    while (std::chrono::weekday{day}.iso_encoding() > 5) day += std::chrono::days{1};
    out.dates.push_back(format_date(std::chrono::year_month_day{day}));
    day += std::chrono::days{1};
    for (Eigen::Index f = 0; f < k; ++f) factor(f) = factor_vol * normal(rng);
    for (Eigen::Index j = 0; j < n; ++j) {
      out.values(i, j) = mu(j) + loadings.row(j).dot(factor) + idio(j) * normal(rng);
    }
  }
  return out;
}

}  // namespace frontier
