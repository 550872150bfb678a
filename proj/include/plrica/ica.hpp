#pragma once

// FastICA (centering, whitening, fixed-point iteration) and the conversion of
// an unmixing matrix into treatment effects by permutation/scale resolution.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "plrica/effect.hpp"
#include "plrica/errors.hpp"
#include "plrica/numeric.hpp"
#include "plrica/plr.hpp"
#include "plrica/random.hpp"

namespace plrica {

enum class Contrast { logcosh, exp, cube };
enum class IcaMode { parallel, deflation };

inline std::string_view to_string(Contrast c) {
  switch (c) {
    case Contrast::logcosh: return "logcosh";
    case Contrast::exp: return "exp";
    case Contrast::cube: return "cube";
  }
  return "unknown";
}

inline Contrast parse_contrast(std::string_view s) {
  if (s == "logcosh") return Contrast::logcosh;
  if (s == "exp") return Contrast::exp;
  if (s == "cube") return Contrast::cube;
  throw InvalidArgument("unknown contrast '" + std::string(s) + "'");
}

inline std::string_view to_string(IcaMode m) {
  return m == IcaMode::parallel ? "parallel" : "deflation";
}

inline IcaMode parse_ica_mode(std::string_view s) {
  if (s == "parallel" || s == "symmetric") return IcaMode::parallel;
  if (s == "deflation") return IcaMode::deflation;
  throw InvalidArgument("unknown ICA mode '" + std::string(s) + "'");
}

/// t(u) and t'(u) for the contrast.
inline void contrast_eval(Contrast c, double u, double& t, double& tp) {
  switch (c) {
    case Contrast::logcosh: {
      t = std::tanh(u);
      tp = 1.0 - t * t;
      return;
    }
    case Contrast::exp: {
      const double e = std::exp(-0.5 * u * u);
      t = u * e;
      tp = (1.0 - u * u) * e;
      return;
    }
    case Contrast::cube:
      t = u * u * u;
      tp = 3.0 * u * u;
      return;
  }
}

// ---------------------------------------------------------------------------
// Whitening

struct Whitening {
  Matrix whitened;  // n×d
  Matrix K;         // d×d, whitened = (data - means)·Kᵀ
  Vector means;
};

inline Whitening whiten(const Matrix& data) {
  const Index n = data.rows(), d = data.cols();
  if (n <= d) throw InvalidArgument("whiten: need more rows than columns");
  Whitening w;
  w.means = data.colwise().mean().transpose();
  Matrix centered = data.rowwise() - w.means.transpose();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(n);
  const Matrix sym = 0.5 * (cov + cov.transpose());
  const SymEig eig = sym_eig(sym);
  if (!(eig.values.minCoeff() > 1e-10))
    throw SingularMatrix("whiten: sample covariance is rank deficient");
  w.K = eig.values.cwiseSqrt().cwiseInverse().asDiagonal() * eig.vectors.transpose();
  w.whitened = centered * w.K.transpose();
  return w;
}

// ---------------------------------------------------------------------------
// Fixed-point iteration

struct FastIcaOptions {
  Contrast contrast = Contrast::logcosh;
  double tol = 1e-4;
  int max_iter = 1000;
  IcaMode mode = IcaMode::parallel;
  std::uint64_t seed = 0;
};

struct FastIcaResult {
  Matrix w;  // rows orthonormal, acting on whitened data
  bool converged = false;
  int iterations = 0;
};

/// (W Wᵀ)^{-1/2} W
inline Matrix symmetric_decorrelation(const Matrix& w) {
  const Matrix g = w * w.transpose();
  const SymEig eig = sym_eig(0.5 * (g + g.transpose()));
  if (!(eig.values.minCoeff() > 0.0)) throw SingularMatrix("symmetric decorrelation: singular W");
  return eig.vectors * eig.values.cwiseSqrt().cwiseInverse().asDiagonal() *
             eig.vectors.transpose() * w;
}

namespace detail {

/// E[z t(wᵀz)] - E[t'(wᵀz)] w for every row w of `w` at once.
inline Matrix fixed_point_step(const Matrix& z, const Matrix& w, Contrast c) {
  const Index n = z.rows(), d = w.rows();
  Matrix y = z * w.transpose();  // n×d projections
  Vector mean_tp = Vector::Zero(d);
  for (Index k = 0; k < d; ++k)
    for (Index i = 0; i < n; ++i) {
      double t = 0.0, tp = 0.0;
      contrast_eval(c, y(i, k), t, tp);
      y(i, k) = t;
      mean_tp(k) += tp;
    }
  const double inv_n = 1.0 / static_cast<double>(n);
  mean_tp *= inv_n;
  Matrix out = (y.transpose() * z) * inv_n;
  out -= mean_tp.asDiagonal() * w;
  return out;
}

inline Matrix random_init(Index d, std::uint64_t seed) {
  Rng rng = make_rng(seed, "ica");
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix w(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) w(i, j) = g(rng);
  return w;
}

}  // namespace detail

inline FastIcaResult fastica(const Matrix& whitened, const FastIcaOptions& opts = {}) {
  const Index d = whitened.cols();
  if (d < 1 || whitened.rows() < 2) throw InvalidArgument("fastica: empty input");
  if (!(opts.tol > 0.0) || opts.max_iter < 1) throw InvalidArgument("fastica: bad tolerance/iterations");
  FastIcaResult res;
  const Matrix init = detail::random_init(d, opts.seed);

  if (opts.mode == IcaMode::parallel) {
    Matrix w = symmetric_decorrelation(init);
    for (int it = 1; it <= opts.max_iter; ++it) {
      const Matrix w1 = symmetric_decorrelation(detail::fixed_point_step(whitened, w, opts.contrast));
      const double lim = ((w1 * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
      w = w1;
      res.iterations = it;
      if (lim < opts.tol) {
        res.converged = true;
        break;
      }
    }
    res.w = std::move(w);
    return res;
  }

  // deflation: one unit at a time, Gram-Schmidt against the accepted rows
  Matrix w = Matrix::Zero(d, d);
  res.converged = true;
  for (Index c = 0; c < d; ++c) {
    Vector v = init.row(c).transpose();
    auto project = [&](Vector& x) {
      for (Index k = 0; k < c; ++k) x -= x.dot(w.row(k).transpose()) * w.row(k).transpose();
      x.normalize();
    };
    project(v);
    bool ok = false;
    int it = 1;
    for (; it <= opts.max_iter; ++it) {
      Vector v1 = detail::fixed_point_step(whitened, v.transpose(), opts.contrast).row(0).transpose();
      project(v1);
      const double lim = std::abs(std::abs(v1.dot(v)) - 1.0);
      v = v1;
      if (lim < opts.tol) {
        ok = true;
        break;
      }
    }
    res.iterations = std::max(res.iterations, std::min(it, opts.max_iter));
    res.converged = res.converged && ok;
    w.row(c) = v.transpose();
  }
  res.w = std::move(w);
  return res;
}

// ---------------------------------------------------------------------------
// Unmixing in data coordinates

struct UnmixingEstimate {
  Matrix w_total;    // w_ica·K, acts on centered data
  Matrix w_ica;
  Matrix whitening;  // K
  Vector means;
  bool converged = false;
  int iterations = 0;
  Contrast contrast = Contrast::logcosh;
};

inline UnmixingEstimate assemble_unmixing(const Matrix& w_ica, const Matrix& K, const Vector& means) {
  if (w_ica.cols() != K.rows() || K.cols() != means.size())
    throw InvalidArgument("assemble_unmixing: shape mismatch");
  UnmixingEstimate e;
  e.w_total = w_ica * K;
  e.w_ica = w_ica;
  e.whitening = K;
  e.means = means;
  return e;
}

inline UnmixingEstimate fit_unmixing(const Matrix& data, const FastIcaOptions& opts = {}) {
  const Whitening wh = whiten(data);
  const FastIcaResult fi = fastica(wh.whitened, opts);
  UnmixingEstimate e = assemble_unmixing(fi.w, wh.K, wh.means);
  e.converged = fi.converged;
  e.iterations = fi.iterations;
  e.contrast = opts.contrast;
  return e;
}

inline constexpr double kCanonicalDiagonalThreshold = 1e-8;

/// Reorders rows so row i has the largest attainable |W(·, i)| (maximizing the
/// product of diagonal magnitudes) and scales every row to a unit diagonal.
/// A matched diagonal below 1e-8 times its row's largest entry is degenerate.
inline Matrix canonicalize(const Matrix& w) {
  const Index d = w.rows();
  if (w.cols() != d || d == 0) throw InvalidArgument("canonicalize: matrix must be square");
  if (!all_finite(w)) throw CanonicalizationFailure("canonicalize: non-finite unmixing matrix");
  constexpr double tiny = std::numeric_limits<double>::min();
  Matrix cost(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index r = 0; r < d; ++r) cost(i, r) = -std::log(std::max(std::abs(w(r, i)), tiny));
  const Assignment as = hungarian(cost);
  Matrix out(d, d);
  for (Index i = 0; i < d; ++i) {
    const auto r = static_cast<Index>(as.mapping[static_cast<std::size_t>(i)]);
    const double diag = w(r, i);
    const double row_max = w.row(r).cwiseAbs().maxCoeff();
    if (!(std::abs(diag) >= kCanonicalDiagonalThreshold * row_max) || row_max == 0.0)
      throw CanonicalizationFailure("canonicalize: near-zero diagonal for column " + std::to_string(i));
    out.row(i) = w.row(r) / diag;
  }
  return out;
}

inline Matrix canonicalize(const UnmixingEstimate& est) { return canonicalize(est.w_total); }

/// θ̂_j = -C(outcome, treatment_j).
inline EffectEstimate extract_effects(const Matrix& canonical, const std::vector<ColumnRole>& roles) {
  const auto d = static_cast<Index>(roles.size());
  if (canonical.rows() != d || canonical.cols() != d)
    throw InvalidArgument("extract_effects: roles do not match matrix size");
  Index y = -1, m = 0;
  for (Index c = 0; c < d; ++c) {
    if (roles[static_cast<std::size_t>(c)].role == Role::outcome) y = c;
    if (roles[static_cast<std::size_t>(c)].role == Role::treatment) ++m;
  }
  if (y < 0 || m == 0) throw InvalidArgument("extract_effects: need an outcome and a treatment");
  EffectEstimate e;
  e.method = Method::ica;
  e.theta_hat.resize(m);
  for (Index c = 0; c < d; ++c) {
    const auto& r = roles[static_cast<std::size_t>(c)];
    if (r.role == Role::treatment) e.theta_hat(r.index) = -canonical(y, c);
  }
  return e;
}

/// Whiten, FastICA, canonicalize, read off θ̂.
inline EffectEstimate estimate_ica(const Dataset& ds, const FastIcaOptions& opts = {}) {
  const UnmixingEstimate est = fit_unmixing(ds.columns, opts);
  EffectEstimate e = extract_effects(canonicalize(est), ds.roles);
  e.diagnostics.converged = est.converged;
  e.diagnostics.condition_value = est.iterations;
  e.diagnostics.notes = est.converged ? "" : "fastica did not converge";
  return e;
}

}  // namespace plrica
