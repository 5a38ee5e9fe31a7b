#pragma once

#include <Eigen/Dense>

namespace frontier {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kPdTolerance = 1e-12;
inline constexpr double kSymmetryTolerance = 1e-8;

/// Lower-triangular L with L * L^T == s. Throws NotPositiveDefinite when a
/// pivot falls to or below `pd_tolerance`. Only the lower triangle of `s` is read.
Matrix cholesky_factor(const Matrix& s, double pd_tolerance = kPdTolerance);

/// Dense symmetric positive definite matrix, factored once on construction.
///
/// The input is symmetrized as (S + S^T) / 2. Inputs whose asymmetry exceeds
/// 1e-8 (relative to max(1, max|S|)) are rejected, which tolerates the rounding
/// noise of CSV-estimated covariances but not genuinely non-symmetric data.
/// Instances are immutable and can be shared across threads.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Matrix& entries, double pd_tolerance = kPdTolerance);

  static SpdMatrix identity(Eigen::Index dim);
  static SpdMatrix diagonal(const Vector& diag);

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  const Matrix& factor() const { return lower_; }

  Vector operator*(const Vector& x) const;

 private:
  Matrix entries_;
  Matrix lower_;
};

/// x^T S x, evaluated as ||L^T x||^2 so the result is never negative.
double quad_form(const Vector& x, const SpdMatrix& s);

/// Solves S y = v through the stored factor.
Vector solve_spd(const SpdMatrix& s, const Vector& v);

/// Throws ValidationError if any entry is NaN or infinite.
void require_finite(const Vector& v, const char* name);
void require_finite(const Matrix& m, const char* name);

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what);

}  // namespace frontier
