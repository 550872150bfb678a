#pragma once

// Dense linear-algebra and optimization kernels: Jacobi eigensolver, pivoted
// LU, Lasso coordinate descent and the Hungarian assignment. Eigen is used as
// the storage and BLAS-level layer only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "plrica/errors.hpp"

namespace plrica {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition

struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // column k pairs with values(k)
  int sweeps = 0;
};

/// Cyclic Jacobi rotations on a copy of `m`. Throws InvalidArgument when `m`
/// is not symmetric to 1e-10 (relative to max(1, |m|_max)) and
/// ConvergenceFailure when the off-diagonal norm is still above
/// `tol * |m|_F` after `max_sweeps`.
inline SymEig sym_eig(const Matrix& m, int max_sweeps = 100, double tol = 1e-12) {
  if (m.rows() != m.cols()) throw InvalidArgument("sym_eig: matrix must be square");
  if (!all_finite(m)) throw InvalidArgument("sym_eig: non-finite entry");
  const Index d = m.rows();
  const double scale = std::max(1.0, max_abs(m));
  if (d > 0 && max_abs(m - m.transpose()) > 1e-10 * scale)
    throw InvalidArgument("sym_eig: matrix is not symmetric");

  Matrix a = 0.5 * (m + m.transpose());
  Matrix v = Matrix::Identity(d, d);
  const double frob = a.norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (Index j = 0; j < d; ++j)
      for (Index i = 0; i < d; ++i)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > tol * frob) {
    if (sweep == max_sweeps)
      throw ConvergenceFailure("sym_eig: no convergence after " + std::to_string(max_sweeps) +
                               " sweeps");
    ++sweep;
    for (Index p = 0; p < d - 1; ++p) {
      for (Index q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < d; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < d; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Index k = 0; k < d; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i) > a(j, j); });

  SymEig out;
  out.values.resize(d);
  out.vectors.resize(d, d);
  for (Index k = 0; k < d; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

/// V f(Λ) Vᵀ for a symmetric matrix.
template <typename F>
Matrix sym_apply(const Matrix& m, F&& f) {
  const SymEig e = sym_eig(m);
  Vector fv = e.values.unaryExpr(std::forward<F>(f));
  return e.vectors * fv.asDiagonal() * e.vectors.transpose();
}

// ---------------------------------------------------------------------------
// Linear solves

inline constexpr double kPivotThreshold = 1e-12;

/// LU factorization with partial pivoting; a pivot below 1e-12 in magnitude
/// means the matrix is singular.
class PivotedLu {
 public:
  explicit PivotedLu(const Matrix& m) : lu_(m), perm_(static_cast<std::size_t>(m.rows())) {
    if (m.rows() != m.cols()) throw InvalidArgument("solve_linear: matrix must be square");
    if (!all_finite(m)) throw InvalidArgument("solve_linear: non-finite entry");
    const Index d = m.rows();
    std::iota(perm_.begin(), perm_.end(), Index{0});
    for (Index k = 0; k < d; ++k) {
      Index piv = k;
      for (Index i = k + 1; i < d; ++i)
        if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
      if (std::abs(lu_(piv, k)) < kPivotThreshold)
        throw SingularMatrix("solve_linear: pivot below threshold at column " + std::to_string(k));
      if (piv != k) {
        lu_.row(k).swap(lu_.row(piv));
        std::swap(perm_[k], perm_[piv]);
      }
      for (Index i = k + 1; i < d; ++i) {
        lu_(i, k) /= lu_(k, k);
        const double f = lu_(i, k);
        if (f != 0.0) lu_.row(i).tail(d - k - 1) -= f * lu_.row(k).tail(d - k - 1);
      }
    }
  }

  Matrix solve(const Matrix& rhs) const {
    const Index d = lu_.rows();
    if (rhs.rows() != d) throw InvalidArgument("solve_linear: rhs has wrong length");
    Matrix x(d, rhs.cols());
    for (Index i = 0; i < d; ++i) x.row(i) = rhs.row(perm_[i]);
    for (Index i = 0; i < d; ++i)
      for (Index k = 0; k < i; ++k) x.row(i) -= lu_(i, k) * x.row(k);
    for (Index i = d - 1; i >= 0; --i) {
      for (Index k = i + 1; k < d; ++k) x.row(i) -= lu_(i, k) * x.row(k);
      x.row(i) /= lu_(i, i);
    }
    return x;
  }

  Vector solve(const Vector& rhs) const { return solve(Matrix(rhs)).col(0); }

  double determinant() const {
    double det = 1.0;
    for (Index i = 0; i < lu_.rows(); ++i) det *= lu_(i, i);
    // parity of the row permutation
    std::vector<Index> p = perm_;
    for (std::size_t i = 0; i < p.size(); ++i) {
      while (p[i] != static_cast<Index>(i)) {
        std::swap(p[i], p[static_cast<std::size_t>(p[i])]);
        det = -det;
      }
    }
    return det;
  }

 private:
  Matrix lu_;
  std::vector<Index> perm_;
};

inline Vector solve_linear(const Matrix& m, const Vector& rhs) { return PivotedLu(m).solve(rhs); }

inline Matrix inverse(const Matrix& m) {
  return PivotedLu(m).solve(Matrix(Matrix::Identity(m.rows(), m.cols())));
}

// ---------------------------------------------------------------------------
// Lasso by cyclic coordinate descent

struct LassoOptions {
  double tol = 1e-4;
  int max_iter = 1000;
  bool track_objective = false;
};

struct LassoFit {
  Vector weights;   // original column scale
  double intercept = 0.0;
  Vector means;     // column means used for centering
  Vector scales;    // column population standard deviations (0 for constant columns)
  int sweeps = 0;
  bool converged = false;
  std::vector<double> objective;  // standardized objective after each sweep

  Vector predict(const Matrix& design) const {
    return (design * weights).array() + intercept;
  }
};

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

/// Minimizes (1/(2n))|y_c - X_s w|² + lam |w|₁ over standardized columns X_s
/// (centered, unit population variance) and centered target y_c. Weights are
/// mapped back to the original column scale with a matching intercept.
inline LassoFit lasso_fit(const Matrix& design, const Vector& target, double lam,
                          const LassoOptions& opts = {}) {
  const Index n = design.rows();
  const Index p = design.cols();
  if (n < 1) throw InvalidArgument("lasso_fit: need at least one observation");
  if (target.size() != n) throw InvalidArgument("lasso_fit: target length mismatch");
  if (!(lam >= 0.0)) throw InvalidArgument("lasso_fit: lambda must be >= 0");

  LassoFit fit;
  fit.means = design.colwise().mean().transpose();
  fit.scales = Vector::Zero(p);
  Matrix xs(n, p);
  Vector col_sq = Vector::Zero(p);
  for (Index j = 0; j < p; ++j) {
    xs.col(j) = design.col(j).array() - fit.means(j);
    const double sd = std::sqrt(xs.col(j).squaredNorm() / static_cast<double>(n));
    if (sd > 1e-12 * std::max(1.0, std::abs(fit.means(j)))) {
      fit.scales(j) = sd;
      xs.col(j) /= sd;
      col_sq(j) = xs.col(j).squaredNorm() / static_cast<double>(n);
    } else {
      xs.col(j).setZero();
    }
  }
  const double y_mean = target.mean();
  Vector resid = target.array() - y_mean;
  Vector w = Vector::Zero(p);
  const double inv_n = 1.0 / static_cast<double>(n);

  auto objective = [&] { return 0.5 * inv_n * resid.squaredNorm() + lam * w.lpNorm<1>(); };

  for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (col_sq(j) == 0.0) continue;
      const double z = inv_n * xs.col(j).dot(resid) + col_sq(j) * w(j);
      const double updated = soft_threshold(z, lam) / col_sq(j);
      const double change = updated - w(j);
      if (change != 0.0) {
        resid.noalias() -= change * xs.col(j);
        w(j) = updated;
        max_change = std::max(max_change, std::abs(change));
      }
    }
    fit.sweeps = sweep;
    if (opts.track_objective) fit.objective.push_back(objective());
    if (max_change < opts.tol) {
      fit.converged = true;
      break;
    }
  }

  fit.weights = Vector::Zero(p);
  for (Index j = 0; j < p; ++j)
    if (fit.scales(j) > 0.0) fit.weights(j) = w(j) / fit.scales(j);
  fit.intercept = y_mean - fit.means.dot(fit.weights);
  return fit;
}

// ---------------------------------------------------------------------------
// Assignment

struct Assignment {
  std::vector<std::size_t> mapping;  // row i -> column mapping[i]
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres with
/// potentials, O(d³)).
inline Assignment hungarian(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw InvalidArgument("hungarian: cost must be square");
  if (!all_finite(cost)) throw InvalidArgument("hungarian: non-finite cost");
  const auto d = static_cast<std::size_t>(cost.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is a sentinel.
  std::vector<double> u(d + 1, 0.0), v(d + 1, 0.0);
  std::vector<std::size_t> match(d + 1, 0), way(d + 1, 0);
  for (std::size_t i = 1; i <= d; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(d + 1, inf);
    std::vector<char> used(d + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= d; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Index>(i0 - 1), static_cast<Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= d; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.mapping.assign(d, 0);
  for (std::size_t j = 1; j <= d; ++j) out.mapping[match[j] - 1] = j - 1;
  for (std::size_t i = 0; i < d; ++i)
    out.cost += cost(static_cast<Index>(i), static_cast<Index>(out.mapping[i]));
  return out;
}

}  // namespace plrica
