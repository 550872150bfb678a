#pragma once

// Partially linear regression models: spec, exact mixing/unmixing for the
// linear case, seeded simulation, and a CSV form for datasets.
//
//   X = ξ
//   T = f(X) + η          f_j(X) = σ(a_j · X)
//   Y = g(X) + θᵀT + ε    g(X)   = σ(b · X)
//
// with σ the identity for linear nuisances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "plrica/distributions.hpp"
#include "plrica/errors.hpp"
#include "plrica/numeric.hpp"
#include "plrica/random.hpp"

namespace plrica {

enum class Nuisance { linear, relu, leaky_relu, sigmoid, tanh };

inline constexpr double kDefaultLeakySlope = 0.2;

inline std::string_view to_string(Nuisance n) {
  switch (n) {
    case Nuisance::linear: return "linear";
    case Nuisance::relu: return "relu";
    case Nuisance::leaky_relu: return "leaky_relu";
    case Nuisance::sigmoid: return "sigmoid";
    case Nuisance::tanh: return "tanh";
  }
  return "unknown";
}

inline Nuisance parse_nuisance(std::string_view s) {
  if (s == "linear" || s == "identity") return Nuisance::linear;
  if (s == "relu") return Nuisance::relu;
  if (s == "leaky_relu" || s == "leaky") return Nuisance::leaky_relu;
  if (s == "sigmoid") return Nuisance::sigmoid;
  if (s == "tanh") return Nuisance::tanh;
  throw InvalidArgument("unknown nonlinearity '" + std::string(s) + "'");
}

inline double apply_nonlinearity(Nuisance kind, double x, double slope = kDefaultLeakySlope) {
  switch (kind) {
    case Nuisance::linear: return x;
    case Nuisance::relu: return x > 0.0 ? x : 0.0;
    case Nuisance::leaky_relu: return x > 0.0 ? x : slope * x;
    case Nuisance::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Nuisance::tanh: return std::tanh(x);
  }
  return x;
}

inline Vector apply_nonlinearity(Nuisance kind, const Vector& x, double slope = kDefaultLeakySlope) {
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) out(i) = apply_nonlinearity(kind, x(i), slope);
  return out;
}

inline Vector apply_nonlinearity(std::string_view name, const Vector& x,
                                 double slope = kDefaultLeakySlope) {
  return apply_nonlinearity(parse_nuisance(name), x, slope);
}

struct PlrSpec {
  Index p = 1;        // covariates
  Index m = 1;        // treatments
  Matrix a_block;     // m×p, X → T
  Vector b_block;     // p,   X → Y
  Vector theta;       // m,   T → Y
  Nuisance nuisance = Nuisance::linear;
  double leaky_slope = kDefaultLeakySlope;
  NoiseSpec noise_x = NoiseSpec::laplace();
  NoiseSpec noise_t = NoiseSpec::laplace();
  NoiseSpec noise_y = NoiseSpec::laplace();
  double sparsity_keep_prob = 0.4;
  // Draw a_block/b_block per seed instead of using the stored values.
  bool random_coefficients = false;
  // Rescale every noise to zero mean and unit variance before use.
  bool standardize_noise = true;

  Index dim() const { return p + m + 1; }
  bool scalar() const { return p == 1 && m == 1; }
  bool linear() const { return nuisance == Nuisance::linear; }

  /// Shapes for random-coefficient specs are filled by draw_coefficients.
  void validate() const {
    if (p < 1 || m < 1) throw InvalidArgument("PlrSpec: p and m must be >= 1");
    if (theta.size() != m) throw InvalidArgument("PlrSpec: theta must have length m");
    if (!theta.allFinite()) throw InvalidArgument("PlrSpec: theta must be finite");
    if (!(sparsity_keep_prob > 0.0 && sparsity_keep_prob <= 1.0))
      throw InvalidArgument("PlrSpec: keep probability must lie in (0, 1]");
    if (!random_coefficients) {
      if (a_block.rows() != m || a_block.cols() != p)
        throw InvalidArgument("PlrSpec: a_block must be m x p");
      if (b_block.size() != p) throw InvalidArgument("PlrSpec: b_block must have length p");
      if (!a_block.allFinite() || !b_block.allFinite())
        throw InvalidArgument("PlrSpec: coefficients must be finite");
    }
    noise_x.validate();
    noise_t.validate();
    noise_y.validate();
  }

  /// One covariate, one treatment, fixed coefficients.
  static PlrSpec scalar_linear(double a, double b, double theta_value,
                               const NoiseSpec& noise = NoiseSpec::laplace()) {
    PlrSpec s;
    s.a_block = Matrix::Constant(1, 1, a);
    s.b_block = Vector::Constant(1, b);
    s.theta = Vector::Constant(1, theta_value);
    s.noise_x = s.noise_t = s.noise_y = noise;
    return s;
  }
};

/// Uniform[-1, 1] entries masked by Bernoulli(keep_prob). Nonlinear specs get
/// unit-norm rows so the nonlinearity sees an O(1) argument.
inline void draw_coefficients(PlrSpec& spec, Rng& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::bernoulli_distribution keep(spec.sparsity_keep_prob);
  spec.a_block.resize(spec.m, spec.p);
  spec.b_block.resize(spec.p);
  for (Index j = 0; j < spec.m; ++j)
    for (Index k = 0; k < spec.p; ++k) {
      const double v = unif(rng);
      spec.a_block(j, k) = keep(rng) ? v : 0.0;
    }
  for (Index k = 0; k < spec.p; ++k) {
    const double v = unif(rng);
    spec.b_block(k) = keep(rng) ? v : 0.0;
  }
  if (!spec.linear()) {
    for (Index j = 0; j < spec.m; ++j) {
      const double nrm = spec.a_block.row(j).norm();
      if (nrm > 0.0) spec.a_block.row(j) /= nrm;
    }
    const double nrm = spec.b_block.norm();
    if (nrm > 0.0) spec.b_block /= nrm;
  }
  spec.random_coefficients = false;
}

/// The spec with coefficients fixed for this seed (identity if already fixed).
inline PlrSpec realize(const PlrSpec& spec, std::uint64_t seed) {
  PlrSpec out = spec;
  if (spec.random_coefficients) {
    Rng rng = make_rng(seed, "coefficients");
    draw_coefficients(out, rng);
  }
  out.validate();
  return out;
}

struct LinearMixing {
  Matrix mixing;    // A: sources → observations
  Matrix unmixing;  // W = A⁻¹
};

inline LinearMixing build_linear_mixing(const PlrSpec& spec) {
  if (!spec.linear()) throw InvalidArgument("build_linear_mixing: nuisance must be linear");
  if (spec.random_coefficients)
    throw InvalidArgument("build_linear_mixing: realize random coefficients first");
  spec.validate();
  const Index p = spec.p, m = spec.m, d = spec.dim(), y = d - 1;
  LinearMixing out{Matrix::Identity(d, d), Matrix::Identity(d, d)};
  Matrix& A = out.mixing;
  Matrix& W = out.unmixing;
  A.block(p, 0, m, p) = spec.a_block;
  W.block(p, 0, m, p) = -spec.a_block;
  A.block(y, 0, 1, p) = (spec.b_block + spec.a_block.transpose() * spec.theta).transpose();
  A.block(y, p, 1, m) = spec.theta.transpose();
  W.block(y, 0, 1, p) = -spec.b_block.transpose();
  W.block(y, p, 1, m) = -spec.theta.transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Datasets

enum class Role { covariate, treatment, outcome };

struct ColumnRole {
  Role role = Role::covariate;
  Index index = 0;  // position within its role
  friend bool operator==(const ColumnRole&, const ColumnRole&) = default;
};

inline std::string column_name(const ColumnRole& r) {
  switch (r.role) {
    case Role::covariate: return "x_" + std::to_string(r.index);
    case Role::treatment: return "t_" + std::to_string(r.index);
    case Role::outcome: return "y";
  }
  return "?";
}

inline std::vector<ColumnRole> standard_roles(Index p, Index m) {
  std::vector<ColumnRole> roles;
  for (Index k = 0; k < p; ++k) roles.push_back({Role::covariate, k});
  for (Index j = 0; j < m; ++j) roles.push_back({Role::treatment, j});
  roles.push_back({Role::outcome, 0});
  return roles;
}

struct GroundTruth {
  PlrSpec spec;    // with realized coefficients
  Matrix sources;  // n×d, columns (ξ, η, ε) in dataset column order
};

struct Dataset {
  Matrix columns;
  std::vector<ColumnRole> roles;
  std::optional<GroundTruth> ground_truth;

  Index n() const { return columns.rows(); }
  Index dim() const { return columns.cols(); }
  Index p() const { return count(Role::covariate); }
  Index m() const { return count(Role::treatment); }

  Index count(Role r) const {
    return static_cast<Index>(std::count_if(roles.begin(), roles.end(),
                                            [r](const ColumnRole& c) { return c.role == r; }));
  }

  Index column_of(Role r, Index index = 0) const {
    for (std::size_t c = 0; c < roles.size(); ++c)
      if (roles[c].role == r && roles[c].index == index) return static_cast<Index>(c);
    throw InvalidArgument("dataset has no column " + column_name({r, index}));
  }

  Matrix covariates() const { return gather(Role::covariate); }
  Matrix treatments() const { return gather(Role::treatment); }
  Vector outcome() const { return columns.col(column_of(Role::outcome)); }

  Matrix gather(Role r) const {
    const Index k = count(r);
    Matrix out(n(), k);
    for (Index j = 0; j < k; ++j) out.col(j) = columns.col(column_of(r, j));
    return out;
  }

  /// Roles must partition the columns: indices 0..k-1 per role, one outcome.
  void validate() const {
    if (n() < 1) throw InvalidArgument("dataset must have at least one row");
    if (static_cast<Index>(roles.size()) != dim())
      throw InvalidArgument("dataset roles do not match column count");
    if (count(Role::outcome) != 1) throw InvalidArgument("dataset needs exactly one outcome");
    if (m() < 1) throw InvalidArgument("dataset needs at least one treatment");
    for (Role r : {Role::covariate, Role::treatment})
      for (Index j = 0; j < count(r); ++j) (void)column_of(r, j);
  }
};

/// Draws n rows. Coefficients come from the "coefficients" sub-stream and the
/// noise columns, in order ξ_0..ξ_{p-1}, η_0..η_{m-1}, ε, from "noise".
inline Dataset simulate(const PlrSpec& spec_in, Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("simulate: n must be >= 1");
  const PlrSpec spec = realize(spec_in, seed);
  const Index p = spec.p, m = spec.m, d = spec.dim();

  auto law = [&](const NoiseSpec& s) { return spec.standardize_noise ? standardized(s) : s; };
  const NoiseSpec nx = law(spec.noise_x), nt = law(spec.noise_t), ny = law(spec.noise_y);

  Rng rng = make_rng(seed, "noise");
  Matrix S(n, d);
  const auto un = static_cast<std::size_t>(n);
  for (Index k = 0; k < p; ++k) S.col(k) = sample(nx, un, rng);
  for (Index j = 0; j < m; ++j) S.col(p + j) = sample(nt, un, rng);
  S.col(d - 1) = sample(ny, un, rng);

  Matrix Z(n, d);
  Z.leftCols(p) = S.leftCols(p);
  const Matrix X = Z.leftCols(p);
  for (Index j = 0; j < m; ++j) {
    const Vector lin = X * spec.a_block.row(j).transpose();
    Z.col(p + j) = apply_nonlinearity(spec.nuisance, lin, spec.leaky_slope) + S.col(p + j);
  }
  const Vector glin = X * spec.b_block;
  Z.col(d - 1) = apply_nonlinearity(spec.nuisance, glin, spec.leaky_slope) +
                 Z.middleCols(p, m) * spec.theta + S.col(d - 1);

  Dataset ds;
  ds.columns = std::move(Z);
  ds.roles = standard_roles(p, m);
  ds.ground_truth = GroundTruth{spec, std::move(S)};
  return ds;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const Dataset& ds, std::ostream& out) {
  for (Index c = 0; c < ds.dim(); ++c)
    out << (c ? "," : "") << column_name(ds.roles[static_cast<std::size_t>(c)]);
  out << '\n';
  for (Index i = 0; i < ds.n(); ++i) {
    for (Index c = 0; c < ds.dim(); ++c) out << (c ? "," : "") << format_double(ds.columns(i, c));
    out << '\n';
  }
}

inline void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  write_csv(ds, f);
  if (!f) throw IoError("write to '" + path + "' failed");
}

inline ColumnRole parse_column_name(std::string_view name) {
  auto idx = [&](std::string_view digits) -> Index {
    if (digits.empty()) throw InvalidArgument("bad column name '" + std::string(name) + "'");
    Index v = 0;
    for (char ch : digits) {
      if (ch < '0' || ch > '9') throw InvalidArgument("bad column name '" + std::string(name) + "'");
      v = v * 10 + (ch - '0');
    }
    return v;
  };
  if (name == "y") return {Role::outcome, 0};
  if (name.starts_with("x_")) return {Role::covariate, idx(name.substr(2))};
  if (name.starts_with("t_")) return {Role::treatment, idx(name.substr(2))};
  throw InvalidArgument("bad column name '" + std::string(name) + "'");
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view s) {
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw InvalidArgument("not a number: '" + tmp + "'");
  return v;
}

inline Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty dataset file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Dataset ds;
  for (const auto& name : split(line, ',')) ds.roles.push_back(parse_column_name(name));
  std::vector<double> vals;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != ds.roles.size())
      throw InvalidArgument("row " + std::to_string(rows + 1) + " has wrong number of fields");
    for (const auto& c : cells) vals.push_back(parse_double(c));
    ++rows;
  }
  const auto d = static_cast<Index>(ds.roles.size());
  ds.columns = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      vals.data(), rows, d);
  ds.validate();
  return ds;
}

inline Dataset read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "'");
  return read_csv(f);
}

}  // namespace plrica
