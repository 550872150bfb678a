#pragma once

// Closed-form asymptotic variances of the HOML and ICA effect estimators with
// the cubic test function, their numerator comparison, and a finite-difference
// check of the mixed (T, Y) derivative of the log-likelihood.

#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "plrica/distributions.hpp"
#include "plrica/errors.hpp"
#include "plrica/numeric.hpp"
#include "plrica/plr.hpp"

namespace plrica {

inline constexpr double kMomentDegeneracy = 1e-12;

/// E[ηt] - E[t'], shared by every formula below.
inline double variance_denominator_root(const MomentReport& m) { return m.e_eta_t - m.e_tprime; }

namespace detail {
inline double checked_square(double root, std::string_view who) {
  if (!(std::abs(root) > kMomentDegeneracy))
    throw DegenerateMoment(std::string(who) + ": zero excess kurtosis");
  return root * root;
}
}  // namespace detail

/// E[(t - Et - η Et')²] for unit-variance, zero-mean η.
inline double numerator_homl(const MomentReport& m) {
  return m.var_t + m.e_tprime * m.e_tprime - 2.0 * m.e_eta_t * m.e_tprime;
}

/// E[t²] - E[ηt]²
inline double numerator_ica(const MomentReport& m) {
  return m.e_t_squared - m.e_eta_t * m.e_eta_t;
}

inline double var_homl(const MomentReport& m) {
  return numerator_homl(m) / detail::checked_square(variance_denominator_root(m), "var_homl");
}

/// Outcome-weighted form E[ε²]·E[(t - Et - ηEt')²]/(...)² in the raw units of a
/// treatment noise with the report's variance.
inline double var_homl_outcome_weighted(const MomentReport& eta, double outcome_second_moment) {
  const double s2 = eta.variance;
  const double mu3 = eta.third_moment * std::pow(s2, 1.5);
  const double mu4 = eta.fourth_moment * s2 * s2;
  const double mu6 = eta.sixth_moment * s2 * s2 * s2;
  const double num = mu6 - mu3 * mu3 - 6.0 * s2 * mu4 + 9.0 * s2 * s2 * s2;
  const double den = detail::checked_square(mu4 - 3.0 * s2 * s2, "var_homl_outcome_weighted");
  return outcome_second_moment * num / den;
}

/// (‖b + aᵀθ‖² + 1)·Var(t(η)) / (E[η⁴] - 3)²
inline double var_ica_auddy(const Matrix& a, const Vector& b, const Vector& theta,
                            const MomentReport& eta) {
  if (a.rows() != theta.size() || a.cols() != b.size())
    throw InvalidArgument("var_ica_auddy: shape mismatch");
  const double mult = (b + a.transpose() * theta).squaredNorm() + 1.0;
  return mult * eta.var_t / detail::checked_square(eta.fourth_moment - 3.0, "var_ica_auddy");
}

inline double var_ica_auddy(double a, double b, double theta, const MomentReport& eta) {
  return var_ica_auddy(Matrix::Constant(1, 1, a), Vector::Constant(1, b), Vector::Constant(1, theta), eta);
}

/// (E[t²] - E[st]²) / E[st - t']² on the outcome noise.
inline double var_ica_hyvarinen(const MomentReport& eps) {
  return numerator_ica(eps) / detail::checked_square(variance_denominator_root(eps), "var_ica_hyvarinen");
}

enum class Regime { ica_better, homl_better, tie };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::ica_better: return "ica_better";
    case Regime::homl_better: return "homl_better";
    case Regime::tie: return "tie";
  }
  return "unknown";
}

struct NumeratorComparison {
  double gap = 0.0;  // numerator_homl - numerator_ica
  Regime regime = Regime::tie;
};

inline NumeratorComparison compare_numerators(const MomentReport& m) {
  NumeratorComparison c;
  const double d = m.e_tprime - m.e_eta_t;
  c.gap = d * d - m.e_t * m.e_t;
  if (std::abs(c.gap) <= kMomentDegeneracy) c.regime = Regime::tie;
  else c.regime = c.gap > 0.0 ? Regime::ica_better : Regime::homl_better;
  return c;
}

struct VarianceReport {
  double var_homl = std::numeric_limits<double>::quiet_NaN();
  double var_ica_auddy = std::numeric_limits<double>::quiet_NaN();
  double var_ica_hyvarinen = std::numeric_limits<double>::quiet_NaN();
  double numerator_gap = 0.0;
  Regime regime = Regime::tie;
};

/// Treatment-noise moments drive the HOML and Auddy forms, outcome-noise
/// moments the Hyvärinen form. Degenerate entries are NaN.
inline VarianceReport variance_report(const PlrSpec& spec) {
  if (spec.random_coefficients) throw InvalidArgument("variance_report: coefficients must be fixed");
  spec.validate();
  const MomentReport mt = moments(spec.noise_t);
  const MomentReport my = moments(spec.noise_y);
  VarianceReport r;
  try { r.var_homl = var_homl(mt); } catch (const DegenerateMoment&) {}
  try { r.var_ica_auddy = var_ica_auddy(spec.a_block, spec.b_block, spec.theta, mt); } catch (const DegenerateMoment&) {}
  try { r.var_ica_hyvarinen = var_ica_hyvarinen(my); } catch (const DegenerateMoment&) {}
  const NumeratorComparison c = compare_numerators(mt);
  r.numerator_gap = c.gap;
  r.regime = c.regime;
  return r;
}

// ---------------------------------------------------------------------------
// Mixed derivative of the log-likelihood

/// log p(x, t, y) for the spec's structural equations.
inline double log_likelihood(const PlrSpec& spec, const Vector& x, const Vector& t, double y) {
  auto law = [&](const NoiseSpec& s) { return spec.standardize_noise ? standardized(s) : s; };
  const NoiseSpec nx = law(spec.noise_x), nt = law(spec.noise_t), ny = law(spec.noise_y);
  double lp = 0.0;
  for (Index k = 0; k < x.size(); ++k) lp += log_density(nx, x(k));
  for (Index j = 0; j < t.size(); ++j) {
    const double f = apply_nonlinearity(spec.nuisance, spec.a_block.row(j).dot(x), spec.leaky_slope);
    lp += log_density(nt, t(j) - f);
  }
  const double g = apply_nonlinearity(spec.nuisance, spec.b_block.dot(x), spec.leaky_slope);
  lp += log_density(ny, y - g - spec.theta.dot(t));
  return lp;
}

/// Central difference estimate of ∂²/∂t_j∂y log p at (x, t, y); equals θ_j
/// when the outcome noise is unit-variance Gaussian.
inline double score_cross_derivative(const PlrSpec& spec, const Vector& x, const Vector& t, double y,
                                     Index treatment = 0, double h = 1e-3) {
  if (spec.noise_y.family != NoiseFamily::gaussian)
    throw InvalidArgument("score_cross_derivative: outcome noise must be Gaussian");
  if (spec.random_coefficients) throw InvalidArgument("score_cross_derivative: coefficients must be fixed");
  spec.validate();
  if (x.size() != spec.p || t.size() != spec.m) throw InvalidArgument("score_cross_derivative: bad point");
  if (treatment < 0 || treatment >= spec.m) throw InvalidArgument("score_cross_derivative: bad treatment index");
  if (!(h > 0.0)) throw InvalidArgument("score_cross_derivative: step must be positive");
  auto L = [&](double dt, double dy) {
    Vector tt = t;
    tt(treatment) += dt;
    const double v = log_likelihood(spec, x, tt, y + dy);
    if (!std::isfinite(v)) throw InvalidArgument("score_cross_derivative: density evaluation failed");
    return v;
  };
  return (L(h, h) - L(h, -h) - L(-h, h) + L(-h, -h)) / (4.0 * h * h);
}

}  // namespace plrica
