#include "frontier/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "frontier/errors.hpp"

namespace frontier::convex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-300;

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

struct Face {
  Matrix a;
  Vector rhs;
};

Face build_face(const Polytope& p, const std::vector<int>& working) {
  const Eigen::Index n = p.dim();
  const Eigen::Index ne = p.eq.rows();
  Face face{Matrix(ne + static_cast<Eigen::Index>(working.size()), n),
            Vector(ne + static_cast<Eigen::Index>(working.size()))};
  if (ne > 0) {
    face.a.topRows(ne) = p.eq;
    face.rhs.head(ne) = p.eq_rhs;
  }
  for (std::size_t k = 0; k < working.size(); ++k) {
    face.a.row(ne + static_cast<Eigen::Index>(k)) = p.ineq.row(working[k]);
    face.rhs(ne + static_cast<Eigen::Index>(k)) = p.ineq_rhs(working[k]);
  }
  return face;
}

// Orthonormal QR factors of face.a^T (n x r): a^T = q1 * r.
struct FaceQr {
  Matrix q;      // n x n
  Matrix upper;  // r x r
  Eigen::Index rank = 0;
};

FaceQr factor_face(const Matrix& a, Eigen::Index n) {
  FaceQr out;
  const Eigen::Index r = a.rows();
  if (r == 0) {
    out.q = Matrix::Identity(n, n);
    out.upper = Matrix(0, 0);
    return out;
  }
  Eigen::HouseholderQR<Matrix> qr(a.transpose());
  out.q = qr.householderQ();
  out.upper = qr.matrixQR().topLeftCorner(std::min(r, n), std::min(r, n)).triangularView<Eigen::Upper>();
  out.rank = std::min(r, n);
  return out;
}

// Least-norm correction that puts x back on the face.
void snap_to_face(const Face& face, const FaceQr& qr, Vector& x) {
  const Eigen::Index r = face.a.rows();
  if (r == 0) return;
  const Vector resid = face.a * x - face.rhs;
  const Vector y = qr.upper.transpose().triangularView<Eigen::Lower>().solve(resid);
  x -= qr.q.leftCols(r) * y;
}

double row_scale(const Polytope& p, Eigen::Index j, const Vector& x) {
  return 1.0 + std::abs(p.ineq_rhs(j)) + p.ineq.row(j).lpNorm<1>() * inf_norm(x);
}

// Greedy selection of rows independent of the equality rows and of each other.
std::vector<int> independent_rows(const Polytope& p, const std::vector<int>& candidates) {
  const Eigen::Index n = p.dim();
  std::vector<Vector> basis;
  auto try_add = [&](const Vector& v) {
    Vector r = v;
    for (const auto& b : basis) r -= b.dot(r) * b;
    for (const auto& b : basis) r -= b.dot(r) * b;
    const double nr = r.norm();
    if (nr > 1e-8 * std::max(v.norm(), kTiny)) {
      basis.push_back(r / nr);
      return true;
    }
    return false;
  };
  for (Eigen::Index i = 0; i < p.eq.rows(); ++i) try_add(p.eq.row(i).transpose());
  std::vector<int> chosen;
  for (int j : candidates) {
    if (static_cast<Eigen::Index>(basis.size()) >= n) break;
    if (try_add(p.ineq.row(j).transpose())) chosen.push_back(j);
  }
  return chosen;
}

// Minimizes the convex 1-D restriction t -> f(x + t p) on [0, tmax].
double line_minimize(const Objective& f, const Vector& x, const Vector& p, double tmax) {
  auto slope = [&](double t) { return f.gradient(x + t * p).dot(p); };
  double hi = tmax;
  if (std::isfinite(tmax)) {
    if (slope(tmax) <= 0.0) return tmax;
  } else {
    hi = 1.0;
    int doublings = 0;
    while (slope(hi) < 0.0) {
      hi *= 2.0;
      if (++doublings > 200) throw SolverError("objective unbounded along a feasible direction");
    }
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct Multipliers {
  Vector all;  // eq first, then working rows
  double stationarity = 0.0;
};

Multipliers face_multipliers(const Face& face, const FaceQr& qr, const Vector& g) {
  Multipliers m;
  const Eigen::Index r = face.a.rows();
  m.all = Vector::Zero(r);
  if (r > 0) {
    const Vector qtg = qr.q.leftCols(r).transpose() * g;
    m.all = -qr.upper.triangularView<Eigen::Upper>().solve(qtg);
    m.stationarity = inf_norm(g + face.a.transpose() * m.all);
  } else {
    m.stationarity = inf_norm(g);
  }
  return m;
}

}  // namespace

double ProximalObjective::value(const Vector& x) const {
  const Vector d = x - ref_;
  return a_.dot(x) + w_ * d.dot(s_ * d);
}

Vector ProximalObjective::gradient(const Vector& x) const {
  const Vector d = x - ref_;
  return a_ + 2.0 * w_ * (s_ * d);
}

double MeanStdObjective::value(const Vector& x) const {
  const double q = std::max(0.0, x.dot(s_ * x));
  return a_.dot(x) + alpha_ * std::sqrt(q + delta_ * delta_);
}

Vector MeanStdObjective::gradient(const Vector& x) const {
  const Vector sx = s_ * x;
  const double root = std::sqrt(std::max(0.0, x.dot(sx)) + delta_ * delta_);
  if (alpha_ == 0.0 || root == 0.0) return a_;
  return a_ + (alpha_ / root) * sx;
}

Matrix MeanStdObjective::hessian(const Vector& x) const {
  const Vector sx = s_ * x;
  const double root = std::sqrt(std::max(0.0, x.dot(sx)) + delta_ * delta_);
  if (alpha_ == 0.0 || root == 0.0) return Matrix::Zero(x.size(), x.size());
  return alpha_ * (s_ / root - (sx * sx.transpose()) / (root * root * root));
}

double Polytope::violation(const Vector& x) const {
  double v = 0.0;
  if (eq.rows() > 0) v = std::max(v, inf_norm(eq * x - eq_rhs));
  if (ineq.rows() > 0) v = std::max(v, (ineq * x - ineq_rhs).maxCoeff());
  return v;
}

Polytope Polytope::with_row(const Vector& row, double rhs) const {
  Polytope out = *this;
  out.ineq.conservativeResize(ineq.rows() + 1, row.size());
  out.ineq.row(ineq.rows()) = row.transpose();
  out.ineq_rhs.conservativeResize(ineq_rhs.size() + 1);
  out.ineq_rhs(ineq_rhs.size()) = rhs;
  return out;
}

namespace {

// A working face with coordinate-bound rows eliminated: those columns are fixed and
// the remaining rows are factored over the free columns only.
struct ReducedFace {
  std::vector<Eigen::Index> free;
  std::vector<Eigen::Index> fixed;
  Vector fixed_values;
  std::vector<int> general;  // positions in the working set
  Matrix a;                  // [eq; general rows] on the free columns
  Vector rhs;
  FaceQr qr;
  bool dependent = false;
};

struct BoundRow {
  Eigen::Index col = -1;
  double coef = 0.0;
};

std::vector<BoundRow> detect_bound_rows(const Polytope& p) {
  std::vector<BoundRow> out(static_cast<std::size_t>(p.ineq.rows()));
  for (Eigen::Index j = 0; j < p.ineq.rows(); ++j) {
    int nonzeros = 0;
    for (Eigen::Index c = 0; c < p.dim(); ++c) {
      if (p.ineq(j, c) != 0.0) {
        out[static_cast<std::size_t>(j)] = {c, p.ineq(j, c)};
        ++nonzeros;
      }
    }
    if (nonzeros != 1) out[static_cast<std::size_t>(j)] = {};
  }
  return out;
}

ReducedFace reduce_face(const Polytope& p, const std::vector<BoundRow>& bounds, const std::vector<int>& working) {
  const Eigen::Index n = p.dim();
  const Eigen::Index ne = p.eq.rows();
  ReducedFace face;
  std::vector<int> fixed_by(static_cast<std::size_t>(n), -1);
  std::vector<double> values;
  for (std::size_t k = 0; k < working.size(); ++k) {
    const BoundRow& b = bounds[static_cast<std::size_t>(working[k])];
    if (b.col < 0) {
      face.general.push_back(static_cast<int>(k));
      continue;
    }
    if (fixed_by[static_cast<std::size_t>(b.col)] >= 0) face.dependent = true;
    fixed_by[static_cast<std::size_t>(b.col)] = static_cast<int>(k);
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    const int k = fixed_by[static_cast<std::size_t>(c)];
    if (k < 0) {
      face.free.push_back(c);
    } else {
      const int j = working[static_cast<std::size_t>(k)];
      face.fixed.push_back(c);
      values.push_back(p.ineq_rhs(j) / bounds[static_cast<std::size_t>(j)].coef + 0.0);
    }
  }
  face.fixed_values = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  const Eigen::Index nf = static_cast<Eigen::Index>(face.free.size());
  const Eigen::Index rg = ne + static_cast<Eigen::Index>(face.general.size());
  Matrix full(rg, n);
  face.rhs.resize(rg);
  if (ne > 0) {
    full.topRows(ne) = p.eq;
    face.rhs.head(ne) = p.eq_rhs;
  }
  for (std::size_t k = 0; k < face.general.size(); ++k) {
    const int j = working[static_cast<std::size_t>(face.general[k])];
    full.row(ne + static_cast<Eigen::Index>(k)) = p.ineq.row(j);
    face.rhs(ne + static_cast<Eigen::Index>(k)) = p.ineq_rhs(j);
  }
  if (!face.fixed.empty()) face.rhs -= full(Eigen::all, face.fixed) * face.fixed_values;
  face.a = full(Eigen::all, face.free);
  face.qr = factor_face(face.a, nf);
  const Eigen::Index r = face.a.rows();
  if (r > nf || (r > 0 && face.qr.upper.diagonal().cwiseAbs().minCoeff() <=
                              1e-12 * std::max(face.qr.upper.diagonal().cwiseAbs().maxCoeff(), kTiny))) {
    face.dependent = true;
  }
  return face;
}

void snap_to_face(const ReducedFace& face, Vector& x) {
  x(face.fixed) = face.fixed_values;
  const Eigen::Index r = face.a.rows();
  if (r == 0) return;
  const Vector xf = x(face.free);
  const Vector resid = face.a * xf - face.rhs;
  const Vector y = face.qr.upper.transpose().triangularView<Eigen::Lower>().solve(resid);
  x(face.free) = xf - face.qr.q.leftCols(r) * y;
}

// Multipliers in working order (eq first), with the bound rows recovered from
// their column of the stationarity condition.
Multipliers face_multipliers(const Polytope& p, const std::vector<BoundRow>& bounds, const std::vector<int>& working,
                             const ReducedFace& face, const Vector& g) {
  const Eigen::Index ne = p.eq.rows();
  const Eigen::Index r = face.a.rows();
  Multipliers m;
  m.all = Vector::Zero(ne + static_cast<Eigen::Index>(working.size()));
  const Vector gf = g(face.free);
  Vector mu = Vector::Zero(r);
  if (r > 0) {
    mu = -face.qr.upper.triangularView<Eigen::Upper>().solve(face.qr.q.leftCols(r).transpose() * gf);
    m.stationarity = inf_norm(gf + face.a.transpose() * mu);
  } else {
    m.stationarity = inf_norm(gf);
  }
  m.all.head(ne) = mu.head(ne);
  Vector reduced = g;
  if (ne > 0) reduced += p.eq.transpose() * mu.head(ne);
  for (std::size_t k = 0; k < face.general.size(); ++k) {
    const Eigen::Index row = ne + static_cast<Eigen::Index>(k);
    m.all(ne + face.general[k]) = mu(row);
    reduced += p.ineq.row(working[static_cast<std::size_t>(face.general[k])]).transpose() * mu(row);
  }
  for (std::size_t k = 0; k < working.size(); ++k) {
    const BoundRow& b = bounds[static_cast<std::size_t>(working[k])];
    if (b.col >= 0) m.all(ne + static_cast<Eigen::Index>(k)) = -reduced(b.col) / b.coef;
  }
  return m;
}

}  // namespace

KktPoint active_set_minimize(const Objective& f, const Polytope& p, Vector x, std::vector<int> working,
                             const ActiveSetOptions& opts) {
  const Eigen::Index n = p.dim();
  const Eigen::Index ne = p.eq.rows();
  const Eigen::Index ni = p.ineq.rows();
  std::sort(working.begin(), working.end());
  working.erase(std::unique(working.begin(), working.end()), working.end());
  std::vector<char> in_working(static_cast<std::size_t>(ni), 0);
  for (int j : working) in_working[static_cast<std::size_t>(j)] = 1;
  const std::vector<BoundRow> bounds = detect_bound_rows(p);

  bool face_solved = false;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const ReducedFace face = reduce_face(p, bounds, working);

    // Drop rows that became dependent (degenerate vertices).
    if (face.dependent) {
      if (working.empty()) throw SolverError("equality constraints are linearly dependent");
      in_working[static_cast<std::size_t>(working.back())] = 0;
      working.pop_back();
      continue;
    }
    snap_to_face(face, x);

    const Vector g = f.gradient(x);
    if (!g.allFinite()) throw NonFiniteGradient("gradient is not finite");
    const double gnorm = inf_norm(g);
    const Eigen::Index nf = static_cast<Eigen::Index>(face.free.size());
    const Eigen::Index nz = nf - face.a.rows();

    Vector dir = Vector::Zero(n);
    bool newton = false;
    bool stationary = face_solved || nz == 0;
    if (!stationary) {
      const Matrix z = face.qr.q.rightCols(nz);
      const Vector gz = z.transpose() * g(face.free);
      if (inf_norm(gz) <= opts.stationarity_tolerance * std::max(gnorm, kTiny)) {
        stationary = true;
      } else {
        const Matrix h = f.hessian(x);
        const Matrix hz = z.transpose() * h(face.free, face.free) * z;
        Eigen::LDLT<Matrix> ldlt(hz);
        const Vector d = ldlt.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        Vector step_z;
        if (ldlt.info() == Eigen::Success && dmax > 0.0 && d.minCoeff() > 1e-12 * dmax) {
          step_z = -ldlt.solve(gz);
          newton = true;
        } else {
          // Singular along some face direction (linear or ray-linear objective):
          // regularized direction with an exact line search.
          const double ridge = 1e-10 * std::max(dmax, 1.0);
          const Matrix hr = hz + ridge * Matrix::Identity(nz, nz);
          step_z = -hr.ldlt().solve(gz);
        }
        dir(face.free) = z * step_z;
        if (inf_norm(dir) <= 1e-15 * std::max(1.0, inf_norm(x))) stationary = true;
      }
    }

    if (stationary) {
      const Multipliers m = face_multipliers(p, bounds, working, face, g);
      const Eigen::Index r = m.all.size();
      int drop = -1;
      double most_negative = -opts.dual_tolerance * std::max(gnorm, 1e-12);
      for (Eigen::Index i = ne; i < r; ++i) {
        if (m.all(i) < most_negative) {
          most_negative = m.all(i);
          drop = static_cast<int>(i - ne);
        }
      }
      if (drop < 0) {
        KktPoint out;
        out.value = f.value(x);
        out.working = working;
        out.eq_multipliers = m.all.head(ne);
        out.working_multipliers = m.all.tail(r - ne);
        double dual_infeasibility = 0.0;
        if (r > ne) dual_infeasibility = std::max(0.0, -out.working_multipliers.minCoeff());
        out.residual = std::max(m.stationarity, dual_infeasibility) / std::max(1.0, gnorm) +
                       std::max(0.0, p.violation(x));
        out.x = std::move(x);
        out.iterations = iter + 1;
        return out;
      }
      in_working[static_cast<std::size_t>(working[static_cast<std::size_t>(drop)])] = 0;
      working.erase(working.begin() + drop);
      face_solved = false;
      continue;
    }
    // Ratio test against rows outside the working set; lowest index wins ties.
    double tmax = kInf;
    int block = -1;
    const double dnorm = dir.norm();
    for (Eigen::Index j = 0; j < ni; ++j) {
      if (in_working[static_cast<std::size_t>(j)]) continue;
      const double gp = p.ineq.row(j).dot(dir);
      if (gp <= 1e-13 * p.ineq.row(j).norm() * dnorm) continue;
      const double slack = std::max(0.0, p.ineq_rhs(j) - p.ineq.row(j).dot(x));
      const double t = slack / gp;
      if (t < tmax) {
        tmax = t;
        block = static_cast<int>(j);
      }
    }

    double step = 0.0;
    bool progress = true;
    if (newton) {
      step = std::min(1.0, tmax);
      // Short Newton steps are taken in full: near the solution the function
      // values needed by the line search are swamped by rounding.
      const bool local = inf_norm(dir) <= 1e-6 * std::max(1.0, inf_norm(x));
      if (!f.quadratic() && !local) {
        const double f0 = f.value(x);
        const double slope = g.dot(dir);
        // Predicted decrease below the rounding level of f: nothing left to gain on this face.
        if (-slope <= 1e-15 * std::abs(f0)) progress = false;
        while (progress && f.value(x + step * dir) > f0 + 1e-4 * step * slope + 1e-15 * std::abs(f0)) {
          step *= 0.5;
          if (step < 1e-14) {
            progress = false;
            break;
          }
        }
      }
    } else {
      step = line_minimize(f, x, dir, tmax);
    }
    if (!progress) {
      face_solved = true;
      continue;
    }
    x += step * dir;
    if (block >= 0 && step >= tmax) {
      working.push_back(block);
      in_working[static_cast<std::size_t>(block)] = 1;
      face_solved = false;
    } else {
      // A full Newton step this short leaves only rounding-level stationarity error.
      const bool converged_step = f.quadratic() || inf_norm(dir) <= 1e-9 * std::max(1.0, inf_norm(x));
      face_solved = (newton && step == 1.0 && converged_step) || step == 0.0;
    }
  }
  throw MaxIterationsExceeded("active-set iteration limit reached", x, kkt_residual(f, p, x));
}

BarrierResult barrier_minimize(const Objective& f, const Polytope& p, const std::vector<const Objective*>& nonlinear,
                               Vector x, const BarrierOptions& opts) {
  const Eigen::Index n = x.size();
  const Eigen::Index ne = p.eq.rows();
  const Eigen::Index ni = p.ineq.rows();
  const auto nn = static_cast<Eigen::Index>(nonlinear.size());
  const double m_total = static_cast<double>(ni + nn);

  auto slacks = [&](const Vector& y) -> Vector {
    if (ni == 0) return Vector(0);
    return p.ineq_rhs - p.ineq * y;
  };
  auto strictly_feasible = [&](const Vector& y) {
    if (ni > 0 && !(slacks(y).minCoeff() > 0.0)) return false;
    for (const Objective* c : nonlinear) {
      if (!(c->value(y) < 0.0)) return false;
    }
    return true;
  };
  if (!strictly_feasible(x)) throw InfeasibleDomain("barrier start point is not strictly feasible");

  auto objective_scale = [&](const Vector& y) {
    return std::abs(f.value(y)) + inf_norm(f.gradient(y)) * (1.0 + inf_norm(y));
  };
  const double scale0 = std::max(objective_scale(x), kTiny);
  double t = opts.t0 > 0.0 ? opts.t0 : 1.0 / scale0;
  if (m_total == 0.0) t = 1.0;

  auto merit = [&](const Vector& y) {
    double v = t * f.value(y);
    if (ni > 0) v -= slacks(y).array().log().sum();
    for (const Objective* c : nonlinear) v -= std::log(-c->value(y));
    return v;
  };

  const std::vector<BoundRow> bounds = detect_bound_rows(p);
  std::vector<Eigen::Index> bound_rows;
  std::vector<Eigen::Index> general_rows;
  for (Eigen::Index j = 0; j < ni; ++j) {
    (bounds[static_cast<std::size_t>(j)].col >= 0 ? bound_rows : general_rows).push_back(j);
  }

  BarrierResult out;
  Vector nu = Vector::Zero(ne);
  int steps = 0;
  for (;;) {
    double previous_decrement = kInf;
    for (int it = 0; it < 500; ++it) {
      const Vector s = slacks(x);
      Vector grad = t * f.gradient(x);
      Matrix hess = t * f.hessian(x);
      if (ni > 0) {
        const Vector inv_s = s.cwiseInverse();
        grad += p.ineq.transpose() * inv_s;
        for (std::size_t k = 0; k < bound_rows.size(); ++k) {
          const BoundRow& b = bounds[static_cast<std::size_t>(bound_rows[k])];
          const double w = inv_s(bound_rows[k]);
          hess(b.col, b.col) += b.coef * b.coef * w * w;
        }
        if (!general_rows.empty()) {
          const Matrix rows = p.ineq(general_rows, Eigen::all);
          const Vector w = inv_s(general_rows).cwiseAbs2();
          hess.noalias() += rows.transpose() * w.asDiagonal() * rows;
        }
      }
      for (const Objective* c : nonlinear) {
        const double cv = c->value(x);
        const Vector cg = c->gradient(x);
        grad += cg / (-cv);
        hess += (cg * cg.transpose()) / (cv * cv) + c->hessian(x) / (-cv);
      }

      Eigen::LLT<Matrix> llt(hess);
      if (llt.info() != Eigen::Success) {
        const double ridge = 1e-12 * std::max(hess.diagonal().cwiseAbs().maxCoeff(), 1.0);
        llt.compute(hess + ridge * Matrix::Identity(n, n));
        if (llt.info() != Eigen::Success) throw SolverError("barrier Newton system is singular");
      }
      Vector dx = llt.solve(-grad);
      if (ne > 0) {
        const Vector eq_resid = p.eq_rhs - p.eq * x;
        const Matrix y = llt.solve(p.eq.transpose());
        const Matrix schur = p.eq * y;
        nu = schur.ldlt().solve(p.eq * dx - eq_resid);
        dx -= y * nu;
      }
      const double decrement = -grad.dot(dx);
      if (decrement <= 1e-10) break;
      // Rounding floor: the decrement stopped contracting.
      if (decrement < 1e-6 && decrement > 0.5 * previous_decrement) break;
      previous_decrement = decrement;

      double step = 1.0;
      if (ni > 0) {
        const Vector gd = p.ineq * dx;
        for (Eigen::Index j = 0; j < ni; ++j) {
          if (gd(j) > 0.0) step = std::min(step, 0.99 * s(j) / gd(j));
        }
      }
      for (int k = 0; k < 200 && !strictly_feasible(x + step * dx); ++k) step *= 0.5;
      // Inside the quadratic convergence region of the self-concordant merit a
      // full (feasible) step is safe; the merit comparison is dominated by
      // rounding there once t is large.
      const double m0 = decrement < 0.0625 ? 0.0 : merit(x);
      for (int k = 0; k < 100 && decrement >= 0.0625; ++k) {
        const Vector trial = x + step * dx;
        if (strictly_feasible(trial) && merit(trial) <= m0 - 0.01 * step * decrement) break;
        step *= 0.5;
      }
      const Vector trial = x + step * dx;
      if (!strictly_feasible(trial)) break;
      x = trial;
      if (++steps > opts.max_newton_steps) {
        throw MaxIterationsExceeded("barrier Newton step limit reached", x, m_total / t);
      }
      if (opts.stop_below && f.value(x) < *opts.stop_below) break;
      if (step < 1e-14) break;
    }
    const bool early = opts.stop_below && f.value(x) < *opts.stop_below;
    const double scale = std::max(objective_scale(x), 1e-3 * scale0);
    if (early || m_total == 0.0 || m_total / t <= opts.gap_tolerance * scale) break;
    t *= opts.t_growth;
  }

  out.x = x;
  out.value = f.value(x);
  out.t = t;
  out.gap = m_total / t;
  out.newton_steps = steps;
  Vector lagrangian = f.gradient(x);
  if (ni > 0) {
    out.ineq_multipliers = slacks(x).cwiseInverse() / t;
    lagrangian += p.ineq.transpose() * out.ineq_multipliers;
  }
  out.nonlinear_multipliers = Vector(nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    const Objective* c = nonlinear[static_cast<std::size_t>(i)];
    out.nonlinear_multipliers(i) = 1.0 / (t * -c->value(x));
    lagrangian += out.nonlinear_multipliers(i) * c->gradient(x);
  }
  out.eq_multipliers = nu / t;
  if (ne > 0) lagrangian += p.eq.transpose() * out.eq_multipliers;
  out.stationarity = inf_norm(lagrangian);
  return out;
}

KktPoint crossover(const Objective& f, const Polytope& p, const Vector& barrier_point, const ActiveSetOptions& opts) {
  const Eigen::Index n = p.dim();
  const Eigen::Index ni = p.ineq.rows();
  std::vector<int> candidates;
  std::vector<double> rel_slack(static_cast<std::size_t>(ni));
  for (Eigen::Index j = 0; j < ni; ++j) {
    const double slack = p.ineq_rhs(j) - p.ineq.row(j).dot(barrier_point);
    rel_slack[static_cast<std::size_t>(j)] = slack / row_scale(p, j, barrier_point);
    if (rel_slack[static_cast<std::size_t>(j)] <= 1e-6) candidates.push_back(static_cast<int>(j));
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    return rel_slack[static_cast<std::size_t>(a)] < rel_slack[static_cast<std::size_t>(b)];
  });
  std::vector<int> working = independent_rows(p, candidates);

  Vector x = barrier_point;
  bool snapped = false;
  for (int round = 0; round < 6; ++round) {
    Face face = build_face(p, working);
    FaceQr qr = factor_face(face.a, n);
    x = barrier_point;
    snap_to_face(face, qr, x);
    std::vector<int> violated;
    for (Eigen::Index j = 0; j < ni; ++j) {
      if (std::find(working.begin(), working.end(), static_cast<int>(j)) != working.end()) continue;
      if (p.ineq.row(j).dot(x) - p.ineq_rhs(j) > 1e-14 * row_scale(p, j, x)) violated.push_back(static_cast<int>(j));
    }
    if (violated.empty()) {
      snapped = true;
      break;
    }
    std::vector<int> extended = working;
    extended.insert(extended.end(), violated.begin(), violated.end());
    std::vector<int> next = independent_rows(p, extended);
    if (next.size() == working.size()) break;
    working = std::move(next);
  }
  if (!snapped) {
    x = barrier_point;
    working.clear();
  }
  return active_set_minimize(f, p, std::move(x), std::move(working), opts);
}

KktPoint minimize(const Objective& f, const Polytope& p, const Vector& interior, const ActiveSetOptions& opts) {
  BarrierOptions bopts;
  bopts.gap_tolerance = 1e-10;
  const BarrierResult br = barrier_minimize(f, p, {}, interior, bopts);
  return crossover(f, p, br.x, opts);
}

double kkt_residual(const Objective& f, const Polytope& p, const Vector& x, double activity_tolerance) {
  const Eigen::Index n = p.dim();
  std::vector<int> candidates;
  for (Eigen::Index j = 0; j < p.ineq.rows(); ++j) {
    const double slack = p.ineq_rhs(j) - p.ineq.row(j).dot(x);
    if (slack <= activity_tolerance * row_scale(p, j, x)) candidates.push_back(static_cast<int>(j));
  }
  const std::vector<int> working = independent_rows(p, candidates);
  const Face face = build_face(p, working);
  const FaceQr qr = factor_face(face.a, n);
  const Vector g = f.gradient(x);
  const Multipliers m = face_multipliers(face, qr, g);
  double dual_infeasibility = 0.0;
  const Eigen::Index ne = p.eq.rows();
  if (m.all.size() > ne) dual_infeasibility = std::max(0.0, -m.all.tail(m.all.size() - ne).minCoeff());
  return std::max(m.stationarity, dual_infeasibility) / std::max(1.0, inf_norm(g)) + std::max(0.0, p.violation(x));
}

}  // namespace frontier::convex
