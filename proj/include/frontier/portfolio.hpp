#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "frontier/linalg.hpp"
#include "frontier/robust_frontier.hpp"

namespace frontier {

/// Per-period simple returns, one row per date.
struct ReturnsMatrix {
  std::vector<std::string> tickers;
  std::vector<std::string> dates;
  Matrix values;  // T x n

  Eigen::Index periods() const { return values.rows(); }
  Eigen::Index assets() const { return values.cols(); }
};

inline constexpr long kMaxCsvCells = 10'000'000;

/// Reads "date,T1,...,Tn" CSV text. Throws ParseError (with row and column),
/// NonMonotoneDates, TooFewRows or FileTooLarge.
ReturnsMatrix parse_returns_csv(std::istream& in);
ReturnsMatrix load_returns_csv(const std::string& path);

/// Writes the same format with 17 significant digits.
void write_returns_csv(std::ostream& out, const ReturnsMatrix& r);

/// Rows [begin, end) as a new matrix.
ReturnsMatrix slice_periods(const ReturnsMatrix& r, Eigen::Index begin, Eigen::Index end);

struct MomentEstimate {
  Vector mean;
  SpdMatrix cov;
  long sample_count = 0;
  /// Ridge added to the diagonal, 0 if none.
  double regularization = 0.0;
};

/// Relative pivot floor used for the covariance positive-definiteness check.
inline constexpr double kCovariancePdTolerance = 1e-10;

/// Column means and unbiased covariance (divisor T - 1), accumulated in one pass.
/// With an explicit ridge, ridge * I is always added; without one, 1e-8 * trace / n
/// is added only if the raw estimate fails the PD check. Throws DegenerateCovariance
/// when the result is still not positive definite.
MomentEstimate estimate_moments(const ReturnsMatrix& r, std::optional<double> ridge = std::nullopt);

struct OutOfSample {
  /// <mu, x>
  double nominal_return = 0.0;
  /// <mu, x> - alpha_eval sqrt(x' Sigma x)
  double worst_case_return = 0.0;
};

/// Evaluates x under a0 = -mu and the given covariance.
OutOfSample evaluate_out_of_sample(const Vector& x, const MomentEstimate& m, double alpha_eval);

struct FactorModelConfig {
  long assets = 20;
  long periods = 750;
  long factors = 3;
  std::uint64_t seed = 2024;
  std::string first_date = "2021-01-04";
};

/// Returns r_t = mu + B f_t + e_t with Gaussian factors and noise, dated on
/// consecutive weekdays.
ReturnsMatrix synthetic_factor_returns(const FactorModelConfig& cfg);

}  // namespace frontier
