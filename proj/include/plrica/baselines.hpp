#pragma once

// Residual-based estimators: first-order OML (partialling out), second-order
// HOML with the cubic test function, and joint least squares.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "plrica/effect.hpp"
#include "plrica/errors.hpp"
#include "plrica/numeric.hpp"
#include "plrica/plr.hpp"

namespace plrica {

struct NuisanceOptions {
  double lambda_scale = 1.0;
  int folds = 2;
  double tol = 1e-4;
  int max_iter = 1000;
};

/// Out-of-fold predictions of each treatment and the outcome from X.
struct NuisanceFit {
  Matrix predictions_t;   // n×m
  Vector predictions_y;   // n
  std::vector<int> fold_assignment;
  double lambda = 0.0;
  Matrix residual_t;      // T - f̂(X)
  Vector residual_y;      // Y - q̂(X)
};

inline std::vector<int> default_folds(Index n, int folds) {
  std::vector<int> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(i % folds);
  return out;
}

inline NuisanceFit fit_nuisance(const Dataset& ds, const NuisanceOptions& opts,
                                const std::vector<int>& folds) {
  const Index n = ds.n();
  if (opts.folds < 2) throw InvalidArgument("fit_nuisance: need at least 2 folds");
  if (n < 2 * opts.folds) throw InvalidArgument("fit_nuisance: fold too small");
  if (static_cast<Index>(folds.size()) != n) throw InvalidArgument("fit_nuisance: fold vector length");
  const Matrix X = ds.covariates();
  const Matrix T = ds.treatments();
  const Vector Y = ds.outcome();
  const Index m = T.cols();

  NuisanceFit fit;
  fit.fold_assignment = folds;
  fit.lambda = opts.lambda_scale *
               std::sqrt(std::log(static_cast<double>(ds.dim())) / static_cast<double>(n));
  fit.predictions_t.resize(n, m);
  fit.predictions_y.resize(n);
  const LassoOptions lo{opts.tol, opts.max_iter, false};

  for (int k = 0; k < opts.folds; ++k) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i) (folds[static_cast<std::size_t>(i)] == k ? test : train).push_back(i);
    if (test.empty() || train.empty()) throw InvalidArgument("fit_nuisance: empty fold");
    const auto ntr = static_cast<Index>(train.size()), nte = static_cast<Index>(test.size());
    Matrix Xtr(ntr, X.cols()), Xte(nte, X.cols());
    for (Index r = 0; r < ntr; ++r) Xtr.row(r) = X.row(train[static_cast<std::size_t>(r)]);
    for (Index r = 0; r < nte; ++r) Xte.row(r) = X.row(test[static_cast<std::size_t>(r)]);
    auto fit_col = [&](const Vector& target) {
      Vector ttr(ntr);
      for (Index r = 0; r < ntr; ++r) ttr(r) = target(train[static_cast<std::size_t>(r)]);
      return lasso_fit(Xtr, ttr, fit.lambda, lo).predict(Xte);
    };
    for (Index j = 0; j < m; ++j) {
      const Vector pred = fit_col(T.col(j));
      for (Index r = 0; r < nte; ++r) fit.predictions_t(test[static_cast<std::size_t>(r)], j) = pred(r);
    }
    const Vector pred = fit_col(Y);
    for (Index r = 0; r < nte; ++r) fit.predictions_y(test[static_cast<std::size_t>(r)]) = pred(r);
  }
  fit.residual_t = T - fit.predictions_t;
  fit.residual_y = Y - fit.predictions_y;
  return fit;
}

inline NuisanceFit fit_nuisance(const Dataset& ds, const NuisanceOptions& opts = {}) {
  return fit_nuisance(ds, opts, default_folds(ds.n(), opts.folds));
}

// ---------------------------------------------------------------------------
// OML

inline EffectEstimate oml_estimate(const Vector& resid_y, const Vector& resid_t) {
  if (resid_y.size() != resid_t.size()) throw InvalidArgument("oml_estimate: length mismatch");
  const double den = resid_t.squaredNorm();
  if (!(den > 0.0)) throw DegenerateMoment("oml_estimate: zero-variance treatment residual");
  EffectEstimate e;
  e.method = Method::oml;
  e.theta_hat = Vector::Constant(1, resid_y.dot(resid_t) / den);
  return e;
}

/// Several treatments: least squares of resid_y on the residual columns.
inline EffectEstimate oml_estimate(const Vector& resid_y, const Matrix& resid_t) {
  if (resid_t.cols() == 1) return oml_estimate(resid_y, Vector(resid_t.col(0)));
  if (resid_y.size() != resid_t.rows()) throw InvalidArgument("oml_estimate: length mismatch");
  EffectEstimate e;
  e.method = Method::oml;
  try {
    e.theta_hat = solve_linear(resid_t.transpose() * resid_t, resid_t.transpose() * resid_y);
  } catch (const SingularMatrix&) {
    throw DegenerateMoment("oml_estimate: singular treatment residual covariance");
  }
  return e;
}

// ---------------------------------------------------------------------------
// HOML, t(η) = η³

struct MomentDiagnostics {
  double denominator = 0.0;     // (1/n) Σ η̂ψ
  double denominator_se = 0.0;  // delta-method standard error of the above
  double threshold = 0.0;
  double condition_value = 0.0; // sample excess kurtosis of η̂
  bool degenerate = false;
};

struct HomlEstimate {
  EffectEstimate estimate;
  MomentDiagnostics moments;
};

inline constexpr double kHomlDenominatorFloor = 1e-6;

/// θ̂ solves Σ (ry - θ η̂) ψ = 0 with ψ = η̂³ - Ê[η̂³] - η̂·Ê[3η̂²]. The moment is
/// flagged degenerate when |denominator| is below max(1e-6, 3 standard errors).
inline HomlEstimate homl_estimate(const Vector& resid_y, const Vector& resid_t) {
  const Index n = resid_t.size();
  if (resid_y.size() != n) throw InvalidArgument("homl_estimate: length mismatch");
  if (n < 2) throw InvalidArgument("homl_estimate: need at least 2 observations");
  if (!(resid_t.squaredNorm() > 0.0)) throw DegenerateMoment("homl_estimate: zero treatment residual");
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto eta = resid_t.array();
  const double m1 = eta.mean();
  const double m2 = eta.square().mean();
  const double m3 = eta.cube().mean();
  const double m4 = eta.square().square().mean();

  const Eigen::ArrayXd psi = eta.cube() - m3 - eta * (3.0 * m2);
  const double num = (resid_y.array() * psi).sum() * inv_n;
  const double den = (eta * psi).sum() * inv_n;  // = m4 - m3 m1 - 3 m2²

  // influence function of m4 - m3 m1 - 3 m2²
  const Eigen::ArrayXd inf = (eta.square().square() - m4) - m1 * (eta.cube() - m3) -
                             m3 * (eta - m1) - 6.0 * m2 * (eta.square() - m2);
  HomlEstimate out;
  auto& d = out.moments;
  d.denominator = den;
  d.denominator_se = std::sqrt(inf.square().mean() * inv_n);
  d.threshold = std::max(kHomlDenominatorFloor, 3.0 * d.denominator_se);
  d.degenerate = !(std::abs(den) >= d.threshold);
  const double c2 = m2 - m1 * m1;
  const double c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
  d.condition_value = c4 / (c2 * c2) - 3.0;

  auto& e = out.estimate;
  e.method = Method::homl;
  e.theta_hat = Vector::Constant(1, num / den);
  e.diagnostics.converged = !d.degenerate;
  e.diagnostics.condition_value = den;
  if (d.degenerate) e.diagnostics.notes = "degenerate moment";
  return out;
}

// ---------------------------------------------------------------------------
// Joint least squares

/// Least squares of y on [T X 1]; returns the T coefficients. X may have zero
/// columns.
inline EffectEstimate ols_joint(const Matrix& treatments, const Matrix& covariates, const Vector& y) {
  const Index n = treatments.rows(), m = treatments.cols(), p = covariates.cols();
  if (covariates.rows() != n || y.size() != n) throw InvalidArgument("ols_joint: row mismatch");
  Matrix D(n, m + p + 1);
  D.leftCols(m) = treatments;
  D.middleCols(m, p) = covariates;
  D.col(m + p).setOnes();
  Vector beta;
  try {
    beta = solve_linear(D.transpose() * D, D.transpose() * y);
  } catch (const SingularMatrix&) {
    throw SingularMatrix("ols_joint: design is rank deficient");
  }
  EffectEstimate e;
  e.method = Method::ols;
  e.theta_hat = beta.head(m);
  return e;
}

inline EffectEstimate ols_joint(const Dataset& ds) {
  return ols_joint(ds.treatments(), ds.covariates(), ds.outcome());
}

// ---------------------------------------------------------------------------
// Dataset-level conveniences

inline EffectEstimate estimate_oml(const Dataset& ds, const NuisanceOptions& opts = {}) {
  const NuisanceFit nf = fit_nuisance(ds, opts);
  return oml_estimate(nf.residual_y, nf.residual_t);
}

inline HomlEstimate estimate_homl(const Dataset& ds, const NuisanceOptions& opts = {}) {
  if (ds.m() != 1) throw InvalidArgument("HOML supports a single treatment only");
  const NuisanceFit nf = fit_nuisance(ds, opts);
  return homl_estimate(nf.residual_y, Vector(nf.residual_t.col(0)));
}

}  // namespace plrica
