#include "frontier/linalg.hpp"

#include <cmath>
#include <sstream>

#include "frontier/errors.hpp"

namespace frontier {

Matrix cholesky_factor(const Matrix& s, double pd_tolerance) {
  if (s.rows() != s.cols() || s.rows() == 0) {
    throw DimensionMismatch("cholesky_factor: matrix must be square and non-empty");
  }
  const Eigen::Index n = s.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = s(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > pd_tolerance)) {
      std::ostringstream msg;
      msg << "matrix is not positive definite (pivot " << j << " = " << pivot << ")";
      throw NotPositiveDefinite(msg.str());
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (s(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
  return l;
}

SpdMatrix::SpdMatrix(const Matrix& entries, double pd_tolerance) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw DimensionMismatch("SpdMatrix: matrix must be square and non-empty");
  }
  require_finite(entries, "SpdMatrix");
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * scale) {
    std::ostringstream msg;
    msg << "SpdMatrix: asymmetry " << asym << " exceeds tolerance";
    throw NotPositiveDefinite(msg.str());
  }
  entries_ = 0.5 * (entries + entries.transpose());
  lower_ = cholesky_factor(entries_, pd_tolerance);
}

SpdMatrix SpdMatrix::identity(Eigen::Index dim) { return SpdMatrix(Matrix::Identity(dim, dim)); }

SpdMatrix SpdMatrix::diagonal(const Vector& diag) { return SpdMatrix(Matrix(diag.asDiagonal())); }

Vector SpdMatrix::operator*(const Vector& x) const {
  require_same_dim(x.size(), dim(), "SpdMatrix * x");
  return entries_ * x;
}

double quad_form(const Vector& x, const SpdMatrix& s) {
  require_same_dim(x.size(), s.dim(), "quad_form");
  return (s.factor().transpose() * x).squaredNorm();
}

Vector solve_spd(const SpdMatrix& s, const Vector& v) {
  require_same_dim(v.size(), s.dim(), "solve_spd");
  const auto l = s.factor().triangularView<Eigen::Lower>();
  Vector y = l.solve(v);
  return l.transpose().solve(y);
}

void require_finite(const Vector& v, const char* name) {
  if (!v.allFinite()) throw ValidationError(std::string(name) + ": non-finite entry");
}

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) throw ValidationError(std::string(name) + ": non-finite entry");
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionMismatch(msg.str());
  }
}

}  // namespace frontier
