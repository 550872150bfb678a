#pragma once

// Univariate noise families, their closed-form standardized moments, and the
// kurtosis-type non-Gaussianity conditions shared by HOML and FastICA.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plrica/errors.hpp"
#include "plrica/numeric.hpp"
#include "plrica/random.hpp"

namespace plrica {

enum class NoiseFamily { gaussian, laplace, uniform, generalized_normal, discrete_symmetric };

inline std::string_view to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::laplace: return "laplace";
    case NoiseFamily::uniform: return "uniform";
    case NoiseFamily::generalized_normal: return "generalized_normal";
    case NoiseFamily::discrete_symmetric: return "discrete";
  }
  return "unknown";
}

inline NoiseFamily parse_noise_family(std::string_view s) {
  if (s == "gaussian" || s == "normal") return NoiseFamily::gaussian;
  if (s == "laplace") return NoiseFamily::laplace;
  if (s == "uniform") return NoiseFamily::uniform;
  if (s == "generalized_normal" || s == "gennorm") return NoiseFamily::generalized_normal;
  if (s == "discrete" || s == "discrete_symmetric" || s == "multinomial")
    return NoiseFamily::discrete_symmetric;
  throw InvalidArgument("unknown noise family '" + std::string(s) + "'");
}

/// A noise law in its natural parameterization:
///   gaussian            N(location, scale²)
///   laplace             Laplace(location, b = scale)
///   uniform             U[location - scale, location + scale]
///   generalized_normal  density ∝ exp(-(|x - location| / scale)^shape_beta)
///   discrete_symmetric  location + scale·s, s ~ support with probabilities
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::gaussian;
  double location = 0.0;
  double scale = 1.0;
  double shape_beta = 2.0;
  std::vector<double> support;
  std::vector<double> probabilities;

  static NoiseSpec gaussian(double mean = 0.0, double sd = 1.0) {
    return {NoiseFamily::gaussian, mean, sd, 2.0, {}, {}};
  }
  static NoiseSpec laplace(double location = 0.0, double b = 1.0) {
    return {NoiseFamily::laplace, location, b, 1.0, {}, {}};
  }
  static NoiseSpec uniform(double center = 0.0, double half_width = 1.0) {
    return {NoiseFamily::uniform, center, half_width, 2.0, {}, {}};
  }
  static NoiseSpec generalized_normal(double beta, double location = 0.0, double alpha = 1.0) {
    return {NoiseFamily::generalized_normal, location, alpha, beta, {}, {}};
  }
  static NoiseSpec discrete(std::vector<double> support, std::vector<double> probabilities,
                            double location = 0.0, double scale = 1.0) {
    return {NoiseFamily::discrete_symmetric, location, scale, 2.0, std::move(support),
            std::move(probabilities)};
  }
  /// {-√2, 0, √2} with probabilities {1/4, 1/2, 1/4}: zero mean, unit
  /// variance, fourth moment 2.
  static NoiseSpec three_point() {
    return discrete({-std::numbers::sqrt2, 0.0, std::numbers::sqrt2}, {0.25, 0.5, 0.25});
  }

  void validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale))
      throw InvalidArgument("noise scale must be positive and finite");
    if (!std::isfinite(location)) throw InvalidArgument("noise location must be finite");
    if (family == NoiseFamily::generalized_normal && !(shape_beta > 0.0 && std::isfinite(shape_beta)))
      throw InvalidArgument("generalized normal shape beta must be positive");
    if (family == NoiseFamily::discrete_symmetric) {
      if (support.empty() || support.size() != probabilities.size())
        throw InvalidArgument("discrete noise needs matching support and probabilities");
      double total = 0.0;
      for (double pr : probabilities) {
        if (!(pr >= 0.0)) throw InvalidArgument("discrete probabilities must be non-negative");
        total += pr;
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw InvalidArgument("discrete probabilities must sum to 1");
      if (discrete_raw_central(2) <= 0.0)
        throw InvalidArgument("discrete noise must have positive variance");
    }
  }

  double mean() const {
    if (family == NoiseFamily::discrete_symmetric) return location + scale * discrete_support_mean();
    return location;
  }

  double variance() const {
    const double s2 = scale * scale;
    switch (family) {
      case NoiseFamily::gaussian: return s2;
      case NoiseFamily::laplace: return 2.0 * s2;
      case NoiseFamily::uniform: return s2 / 3.0;
      case NoiseFamily::generalized_normal:
        return s2 * std::tgamma(3.0 / shape_beta) / std::tgamma(1.0 / shape_beta);
      case NoiseFamily::discrete_symmetric: return s2 * discrete_raw_central(2);
    }
    return s2;
  }

  double discrete_support_mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) m += probabilities[i] * support[i];
    return m;
  }

  /// E[(s - E s)^k] over the unscaled support.
  double discrete_raw_central(int k) const {
    const double mu = discrete_support_mean();
    double acc = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i)
      acc += probabilities[i] * std::pow(support[i] - mu, k);
    return acc;
  }

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

/// Same family, location/scale moved so that mean = 0 and variance = 1.
inline NoiseSpec standardized(const NoiseSpec& spec) {
  spec.validate();
  NoiseSpec out = spec;
  const double sd = std::sqrt(spec.variance());
  out.scale = spec.scale / sd;
  // mean - location is linear in scale (nonzero only for discrete supports)
  out.location = -(spec.mean() - spec.location) * out.scale / spec.scale;
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

/// n i.i.d. draws; the sequence is a pure function of (spec, rng state).
inline Vector sample(const NoiseSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  if (n < 1) throw InvalidArgument("sample: n must be >= 1");
  Vector out(static_cast<Index>(n));
  const double loc = spec.location, s = spec.scale;
  switch (spec.family) {
    case NoiseFamily::gaussian: {
      std::normal_distribution<double> dist(loc, s);
      for (Index i = 0; i < out.size(); ++i) out(i) = dist(rng);
      break;
    }
    case NoiseFamily::laplace: {
      std::exponential_distribution<double> expo(1.0);
      std::bernoulli_distribution sign(0.5);
      for (Index i = 0; i < out.size(); ++i) {
        const double e = s * expo(rng);
        out(i) = loc + (sign(rng) ? e : -e);
      }
      break;
    }
    case NoiseFamily::uniform: {
      std::uniform_real_distribution<double> dist(loc - s, loc + s);
      for (Index i = 0; i < out.size(); ++i) out(i) = dist(rng);
      break;
    }
    case NoiseFamily::generalized_normal: {
      // |x - loc| / alpha = G^(1/beta), G ~ Gamma(1/beta, 1)
      std::gamma_distribution<double> gamma(1.0 / spec.shape_beta, 1.0);
      std::bernoulli_distribution sign(0.5);
      for (Index i = 0; i < out.size(); ++i) {
        const double mag = s * std::pow(gamma(rng), 1.0 / spec.shape_beta);
        out(i) = loc + (sign(rng) ? mag : -mag);
      }
      break;
    }
    case NoiseFamily::discrete_symmetric: {
      std::discrete_distribution<std::size_t> pick(spec.probabilities.begin(),
                                                   spec.probabilities.end());
      for (Index i = 0; i < out.size(); ++i) out(i) = loc + s * spec.support[pick(rng)];
      break;
    }
  }
  return out;
}

inline Vector sample(const NoiseSpec& spec, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample(spec, n, rng);
}

// ---------------------------------------------------------------------------
// Moments

/// Moments for the test function t(u) = u³ evaluated on the standardized
/// variable z = (η - mean) / sd. `mean` and `variance` describe the spec as
/// given; all other fields refer to z.
struct MomentReport {
  double mean = 0.0;
  double variance = 1.0;
  double second_moment = 1.0;  // E z²
  double third_moment = 0.0;   // E z³
  double fourth_moment = 3.0;  // E z⁴
  double sixth_moment = 15.0;  // E z⁶
  double e_t = 0.0;            // E t(z)    = E z³
  double e_tprime = 3.0;       // E t'(z)   = 3 E z²
  double e_eta_t = 3.0;        // E z t(z)  = E z⁴
  double var_t = 15.0;         // Var t(z)  = E z⁶ - (E z³)²
  double e_t_squared = 15.0;   // E t(z)²   = E z⁶
};

namespace detail {

inline MomentReport moments_from_standardized(double mean, double variance, double m3, double m4,
                                              double m6) {
  MomentReport r;
  r.mean = mean;
  r.variance = variance;
  r.second_moment = 1.0;
  r.third_moment = m3;
  r.fourth_moment = m4;
  r.sixth_moment = m6;
  r.e_t = m3;
  r.e_tprime = 3.0 * r.second_moment;
  r.e_eta_t = m4;
  r.var_t = m6 - m3 * m3;
  r.e_t_squared = m6;
  return r;
}

}  // namespace detail

inline MomentReport moments(const NoiseSpec& spec) {
  spec.validate();
  const double mean = spec.mean();
  const double var = spec.variance();
  switch (spec.family) {
    case NoiseFamily::gaussian:
      return detail::moments_from_standardized(mean, var, 0.0, 3.0, 15.0);
    case NoiseFamily::laplace:
      // raw moments k!·b^k with 2b² = 1
      return detail::moments_from_standardized(mean, var, 0.0, 6.0, 90.0);
    case NoiseFamily::uniform:
      // U[-√3, √3]: E z^k = 3^(k/2) / (k + 1)
      return detail::moments_from_standardized(mean, var, 0.0, 9.0 / 5.0, 27.0 / 7.0);
    case NoiseFamily::generalized_normal: {
      const double b = spec.shape_beta;
      const double g1 = std::tgamma(1.0 / b), g3 = std::tgamma(3.0 / b);
      const double m4 = std::tgamma(5.0 / b) * g1 / (g3 * g3);
      const double m6 = std::tgamma(7.0 / b) * g1 * g1 / (g3 * g3 * g3);
      return detail::moments_from_standardized(mean, var, 0.0, m4, m6);
    }
    case NoiseFamily::discrete_symmetric: {
      const double sd = std::sqrt(spec.discrete_raw_central(2));
      return detail::moments_from_standardized(
          mean, var, spec.discrete_raw_central(3) / std::pow(sd, 3),
          spec.discrete_raw_central(4) / std::pow(sd, 4),
          spec.discrete_raw_central(6) / std::pow(sd, 6));
    }
  }
  return {};
}

/// HOML non-degeneracy value E[η^{r+1}] - r·E[η²]·E[η^{r-1}] at r = 3 for
/// independent, standardized treatment noise.
inline double homl_condition_value(const MomentReport& m) {
  constexpr double r = 3.0;
  return m.fourth_moment - r * (m.second_moment * m.second_moment);
}

/// FastICA local-optimum value E[η·t(η) - t'(η)] for t(u) = u³ on whitened data.
inline double ica_condition_value(const MomentReport& m) { return m.e_eta_t - m.e_tprime; }

struct NongaussianityCheck {
  double value = 0.0;      // E[η⁴] - 3
  bool satisfied = false;  // |value| > threshold
  double margin = 0.0;     // |value| - threshold
  double threshold = 0.0;
};

inline NongaussianityCheck check_nongaussianity(const NoiseSpec& spec) {
  NongaussianityCheck c;
  c.value = homl_condition_value(moments(spec));
  c.threshold = 1e-12;
  c.margin = std::abs(c.value) - c.threshold;
  c.satisfied = c.margin > 0.0;
  return c;
}

/// Sample version: the input is standardized internally and the threshold is
/// three delta-method standard errors of the sample kurtosis.
inline NongaussianityCheck check_nongaussianity(std::span<const double> xs) {
  const auto n = static_cast<double>(xs.size());
  if (xs.size() < 4) throw InvalidArgument("check_nongaussianity: need at least 4 samples");
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double m2 = 0.0;
  for (double x : xs) m2 += (x - mean) * (x - mean);
  m2 /= n;
  if (!(m2 > 0.0)) throw InvalidArgument("check_nongaussianity: zero-variance sample");
  const double sd = std::sqrt(m2);
  double m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double z = (x - mean) / sd;
    m3 += z * z * z;
    m4 += z * z * z * z;
  }
  m3 /= n;
  m4 /= n;
  // influence function of m4/m2² with estimated mean and variance
  double var_if = 0.0;
  for (double x : xs) {
    const double z = (x - mean) / sd;
    const double z2 = z * z;
    const double inf = z2 * z2 - m4 - 4.0 * m3 * z - 2.0 * m4 * (z2 - 1.0);
    var_if += inf * inf;
  }
  var_if /= n;
  NongaussianityCheck c;
  c.value = m4 - 3.0;
  c.threshold = 3.0 * std::sqrt(var_if / n);
  c.margin = std::abs(c.value) - c.threshold;
  c.satisfied = c.margin > 0.0;
  return c;
}

inline NongaussianityCheck check_nongaussianity(const Vector& xs) {
  return check_nongaussianity(std::span<const double>(xs.data(), static_cast<std::size_t>(xs.size())));
}

// ---------------------------------------------------------------------------
// Densities

/// Log density of a continuous family; discrete laws have none and throw.
inline double log_density(const NoiseSpec& spec, double x) {
  const double u = x - spec.location;
  const double s = spec.scale;
  switch (spec.family) {
    case NoiseFamily::gaussian:
      return -0.5 * std::log(2.0 * std::numbers::pi * s * s) - 0.5 * u * u / (s * s);
    case NoiseFamily::laplace:
      return -std::log(2.0 * s) - std::abs(u) / s;
    case NoiseFamily::uniform:
      return std::abs(u) <= s ? -std::log(2.0 * s) : -std::numeric_limits<double>::infinity();
    case NoiseFamily::generalized_normal: {
      const double b = spec.shape_beta;
      return std::log(b / (2.0 * s * std::tgamma(1.0 / b))) - std::pow(std::abs(u) / s, b);
    }
    case NoiseFamily::discrete_symmetric:
      throw InvalidArgument("log_density: discrete noise has no density");
  }
  return 0.0;
}

}  // namespace plrica
