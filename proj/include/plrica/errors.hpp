#pragma once

#include <stdexcept>
#include <string>

namespace plrica {

// Base of every error the library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct SingularMatrix : Error {
  using Error::Error;
};

struct ConvergenceFailure : Error {
  using Error::Error;
};

// Permutation/scale resolution of an unmixing matrix hit a near-zero diagonal.
struct CanonicalizationFailure : Error {
  using Error::Error;
};

// A moment denominator vanished (Gaussian-like noise).
struct DegenerateMoment : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace plrica
