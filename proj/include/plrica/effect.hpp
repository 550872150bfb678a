#pragma once

#include <limits>
#include <string>
#include <string_view>

#include "plrica/errors.hpp"
#include "plrica/numeric.hpp"

namespace plrica {

enum class Method { ica, oml, homl, ols };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::ica: return "ica";
    case Method::oml: return "oml";
    case Method::homl: return "homl";
    case Method::ols: return "ols";
  }
  return "unknown";
}

inline Method parse_method(std::string_view s) {
  if (s == "ica") return Method::ica;
  if (s == "oml") return Method::oml;
  if (s == "homl") return Method::homl;
  if (s == "ols") return Method::ols;
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

struct Diagnostics {
  bool converged = true;
  // ICA: iterations used; HOML: denominator / kurtosis estimate. NaN if unused.
  double condition_value = std::numeric_limits<double>::quiet_NaN();
  std::string notes;
};

struct EffectEstimate {
  Vector theta_hat;
  Method method = Method::ica;
  Diagnostics diagnostics;
};

}  // namespace plrica
