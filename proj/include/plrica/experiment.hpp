#pragma once

// Seeded Monte-Carlo sweeps over PLR scenarios, per-run metrics, CSV output
// and aggregate comparisons.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "plrica/baselines.hpp"
#include "plrica/config.hpp"
#include "plrica/distributions.hpp"
#include "plrica/effect.hpp"
#include "plrica/errors.hpp"
#include "plrica/ica.hpp"
#include "plrica/plr.hpp"
#include "plrica/random.hpp"

namespace plrica {

inline const std::vector<double>& default_theta_pool() {
  static const std::vector<double> pool{1.55, 0.65, -2.45, 1.75, -1.35};
  return pool;
}

struct ScenarioConfig {
  std::string name = "custom";
  PlrSpec plr;  // template; axes below override parts of it

  std::vector<Index> sample_sizes{100, 200, 500, 1000, 2000, 5000};
  std::vector<Index> covariate_dims{2, 5, 10, 20, 50};
  std::vector<Index> treatment_counts{1};
  // Empty axes leave the template untouched.
  std::vector<double> beta_values;         // generalized-normal shape of the covariate noise
  std::vector<std::string> nonlinearities;
  std::vector<double> leaky_slopes;
  std::vector<double> locations;           // applied to every noise, disables standardization
  std::vector<double> scales;
  std::vector<double> keep_probs;
  std::vector<double> coefficient_values;  // single nonzero a = b in the first covariate
  std::vector<std::string> contrasts{"logcosh"};

  int seeds = 20;
  std::uint64_t base_seed = 0;
  std::vector<Method> methods{Method::ica};
  std::vector<double> theta_pool;  // θ = prefix of length m; empty uses plr.theta
  bool same_coefficients = false;  // outcome reuses the first treatment's coefficient row
  bool multi_match = true;

  FastIcaOptions ica;
  NuisanceOptions nuisance;
  int workers = 1;
  bool timing = false;

  void validate() const {
    auto nonempty = [](bool empty, const char* what) {
      if (empty) throw ConfigError(std::string("scenario axis '") + what + "' is empty");
    };
    nonempty(sample_sizes.empty(), "sample_sizes");
    nonempty(covariate_dims.empty(), "covariate_dims");
    nonempty(treatment_counts.empty(), "treatment_counts");
    nonempty(contrasts.empty(), "contrasts");
    nonempty(methods.empty(), "methods");
    if (seeds < 1) throw ConfigError("seeds must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    for (Index n : sample_sizes)
      if (n < 4) throw ConfigError("sample sizes must be >= 4");
    for (Index p : covariate_dims)
      if (p < 1) throw ConfigError("covariate dims must be >= 1");
    for (Index m : treatment_counts) {
      if (m < 1) throw ConfigError("treatment counts must be >= 1");
      if (!theta_pool.empty() && static_cast<Index>(theta_pool.size()) < m)
        throw ConfigError("theta_pool shorter than a treatment count");
      if (theta_pool.empty() && plr.theta.size() != m)
        throw ConfigError("theta has wrong length for treatment count " + std::to_string(m));
    }
    for (const auto& c : contrasts) (void)parse_contrast(c);
    for (const auto& s : nonlinearities) (void)parse_nuisance(s);
  }
};

/// One point of the Cartesian sweep.
struct Cell {
  std::string scenario;  // name plus `|key=value` tags for axes without a CSV column
  Index n = 0;
  Index p = 0;
  Index m = 1;
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::string nonlinearity;
  std::string contrast;
  PlrSpec spec;
  double coefficient = std::numeric_limits<double>::quiet_NaN();

  std::string label() const {
    return scenario + "|n=" + std::to_string(n) + "|p=" + std::to_string(p) + "|m=" + std::to_string(m) +
           "|beta=" + format_double(beta) + "|nl=" + nonlinearity + "|c=" + contrast;
  }
};

namespace detail {

template <class T>
std::vector<std::optional<T>> axis(const std::vector<T>& v) {
  if (v.empty()) return {std::nullopt};
  return {v.begin(), v.end()};
}

inline std::string tag(const char* key, double v) { return std::string("|") + key + "=" + format_double(v); }

}  // namespace detail

/// Sweep order: n, p, m, beta, nonlinearity, slope, location, scale,
/// keep_prob, coefficient, contrast (last varies fastest).
inline std::vector<Cell> expand_cells(const ScenarioConfig& cfg) {
  cfg.validate();
  std::vector<Cell> cells;
  for (Index n : cfg.sample_sizes)
    for (Index p : cfg.covariate_dims)
      for (Index m : cfg.treatment_counts)
        for (const auto& beta : detail::axis(cfg.beta_values))
          for (const auto& nl : detail::axis(cfg.nonlinearities))
            for (const auto& slope : detail::axis(cfg.leaky_slopes))
              for (const auto& loc : detail::axis(cfg.locations))
                for (const auto& scale : detail::axis(cfg.scales))
                  for (const auto& keep : detail::axis(cfg.keep_probs))
                    for (const auto& coef : detail::axis(cfg.coefficient_values))
                      for (const auto& contrast : cfg.contrasts) {
                        Cell c;
                        c.n = n;
                        c.p = p;
                        c.m = m;
                        c.contrast = contrast;
                        c.scenario = cfg.name;
                        PlrSpec s = cfg.plr;
                        s.p = p;
                        s.m = m;
                        if (!cfg.theta_pool.empty())
                          s.theta = Eigen::Map<const Vector>(cfg.theta_pool.data(), m);
                        if (beta) {
                          c.beta = *beta;
                          s.noise_x = NoiseSpec::generalized_normal(*beta);
                        }
                        if (nl) s.nuisance = parse_nuisance(*nl);
                        c.nonlinearity = std::string(to_string(s.nuisance));
                        if (slope) {
                          s.leaky_slope = *slope;
                          c.scenario += detail::tag("slope", *slope);
                        }
                        if (loc || scale) s.standardize_noise = false;
                        if (loc) {
                          s.noise_x.location = s.noise_t.location = s.noise_y.location = *loc;
                          c.scenario += detail::tag("loc", *loc);
                        }
                        if (scale) {
                          s.noise_x.scale = s.noise_t.scale = s.noise_y.scale = *scale;
                          c.scenario += detail::tag("scale", *scale);
                        }
                        if (keep) {
                          s.sparsity_keep_prob = *keep;
                          c.scenario += detail::tag("keep", *keep);
                        }
                        if (coef) {
                          c.coefficient = *coef;
                          s.random_coefficients = false;
                          s.a_block = Matrix::Zero(m, p);
                          s.b_block = Vector::Zero(p);
                          s.a_block(0, 0) = *coef;
                          s.b_block(0) = *coef;
                          c.scenario += detail::tag("coef", *coef);
                        } else if (!s.random_coefficients &&
                                   (s.a_block.rows() != m || s.a_block.cols() != p || s.b_block.size() != p)) {
                          throw ConfigError("fixed coefficients do not match p=" + std::to_string(p) +
                                            ", m=" + std::to_string(m) + "; use random_coefficients");
                        }
                        c.spec = std::move(s);
                        cells.push_back(std::move(c));
                      }
  return cells;
}

inline std::uint64_t run_seed(const ScenarioConfig& cfg, const Cell& cell, int i) {
  return splitmix64(cfg.base_seed ^ fnv1a64(cell.label() + "#" + std::to_string(i)));
}

// ---------------------------------------------------------------------------
// Metrics

struct Metrics {
  double mse = 0.0;      // ‖θ - θ̂‖₂²
  double rel_err = 0.0;  // ‖θ - θ̂‖₂ / ‖θ‖₂
  Vector matched;        // θ̂ reordered to line up with θ
};

/// With multi_match, θ̂ is reordered by the permutation minimizing the error
/// (exhaustive; m ≤ 8).
inline Metrics metrics(const Vector& theta, const Vector& theta_hat, bool multi_match) {
  if (theta.size() != theta_hat.size()) throw InvalidArgument("metrics: length mismatch");
  const Index m = theta.size();
  Metrics out;
  out.matched = theta_hat;
  out.mse = (theta - theta_hat).squaredNorm();
  if (multi_match && m > 1) {
    if (m > 8) throw InvalidArgument("metrics: too many treatments for exhaustive matching");
    std::vector<Index> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), Index{0});
    do {
      double err = 0.0;
      for (Index j = 0; j < m; ++j) {
        const double d = theta(j) - theta_hat(perm[static_cast<std::size_t>(j)]);
        err += d * d;
      }
      if (err < out.mse) {
        out.mse = err;
        for (Index j = 0; j < m; ++j) out.matched(j) = theta_hat(perm[static_cast<std::size_t>(j)]);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  out.rel_err = std::sqrt(out.mse) / theta.norm();
  return out;
}

// ---------------------------------------------------------------------------
// Records

struct ResultRecord {
  std::string scenario;
  Index n = 0;
  Index dim_x = 0;
  Index n_treat = 0;
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::string nonlinearity;
  std::string contrast;
  Method method = Method::ica;
  std::uint64_t seed = 0;
  Vector theta_true;
  Vector theta_hat;
  double mse = std::numeric_limits<double>::quiet_NaN();
  double rel_err = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  std::optional<double> wall_ms;
  std::string notes;  // not serialized

  double error_norm() const { return std::sqrt(mse); }
};

/// Runs every configured method on one simulated dataset.
inline std::vector<ResultRecord> run_cell(const ScenarioConfig& cfg, const Cell& cell, std::uint64_t seed) {
  PlrSpec spec = realize(cell.spec, seed);
  if (cfg.same_coefficients) spec.b_block = spec.a_block.row(0).transpose();
  const Dataset ds = simulate(spec, cell.n, seed);

  std::vector<ResultRecord> out;
  for (Method method : cfg.methods) {
    ResultRecord r;
    r.scenario = cell.scenario;
    r.n = cell.n;
    r.dim_x = cell.p;
    r.n_treat = cell.m;
    r.beta = cell.beta;
    r.nonlinearity = cell.nonlinearity;
    r.contrast = cell.contrast;
    r.method = method;
    r.seed = seed;
    r.theta_true = spec.theta;
    r.theta_hat = Vector::Constant(cell.m, std::numeric_limits<double>::quiet_NaN());
    const auto t0 = std::chrono::steady_clock::now();
    try {
      EffectEstimate e;
      switch (method) {
        case Method::ica: {
          FastIcaOptions o = cfg.ica;
          o.contrast = parse_contrast(cell.contrast);
          o.seed = seed;
          e = estimate_ica(ds, o);
          break;
        }
        case Method::oml: e = estimate_oml(ds, cfg.nuisance); break;
        case Method::homl: e = estimate_homl(ds, cfg.nuisance).estimate; break;
        case Method::ols: e = ols_joint(ds); break;
      }
      r.theta_hat = e.theta_hat;
      r.converged = e.diagnostics.converged;
      r.notes = e.diagnostics.notes;
      const Metrics mt = metrics(r.theta_true, r.theta_hat, cfg.multi_match);
      r.mse = mt.mse;
      r.rel_err = mt.rel_err;
    } catch (const std::exception& ex) {
      r.converged = false;
      r.notes = ex.what();
    }
    if (cfg.timing)
      r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

/// Full sweep × seeds × methods. Output order is sweep order, then seed, then
/// method, whatever the worker count.
inline std::vector<ResultRecord> run_scenario(const ScenarioConfig& cfg) {
  const std::vector<Cell> cells = expand_cells(cfg);
  const std::size_t seeds = static_cast<std::size_t>(cfg.seeds);
  const std::size_t tasks = cells.size() * seeds;
  std::vector<std::vector<ResultRecord>> slots(tasks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks;) {
      const Cell& c = cells[t / seeds];
      const int i = static_cast<int>(t % seeds);
      slots[t] = run_cell(cfg, c, run_seed(cfg, c, i));
    }
  };
  const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), std::max<std::size_t>(tasks, 1));
  if (nthreads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < nthreads; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  std::vector<ResultRecord> out;
  for (auto& s : slots)
    for (auto& r : s) out.push_back(std::move(r));
  return out;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kResultsHeader =
    "scenario,n,dim_x,n_treat,beta,nonlinearity,contrast,method,seed,theta_true,theta_hat,mse,rel_err,"
    "converged,wall_ms";

inline std::string join_vector(const Vector& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) out += (i ? ";" : "") + format_double(v(i));
  return out;
}

inline Vector split_vector(const std::string& s) {
  const auto parts = split(s, ';');
  Vector v(static_cast<Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Index>(i)) = parse_double(parts[i]);
  return v;
}

inline void emit_csv(const std::vector<ResultRecord>& records, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const auto& r : records) {
    out << r.scenario << ',' << r.n << ',' << r.dim_x << ',' << r.n_treat << ',' << format_double(r.beta) << ','
        << r.nonlinearity << ',' << r.contrast << ',' << to_string(r.method) << ',' << r.seed << ','
        << join_vector(r.theta_true) << ',' << join_vector(r.theta_hat) << ',' << format_double(r.mse) << ','
        << format_double(r.rel_err) << ',' << (r.converged ? 1 : 0) << ','
        << (r.wall_ms ? format_double(*r.wall_ms) : "") << '\n';
  }
}

inline std::string emit_csv(const std::vector<ResultRecord>& records) {
  std::ostringstream out;
  emit_csv(records, out);
  return out.str();
}

inline void emit_csv(const std::vector<ResultRecord>& records, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  emit_csv(records, f);
  if (!f) throw IoError("write to '" + path + "' failed");
}

inline std::vector<ResultRecord> parse_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) throw InvalidArgument("results CSV: bad header");
  std::vector<ResultRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 15) throw InvalidArgument("results CSV: wrong field count");
    ResultRecord r;
    r.scenario = f[0];
    r.n = std::stoll(f[1]);
    r.dim_x = std::stoll(f[2]);
    r.n_treat = std::stoll(f[3]);
    r.beta = parse_double(f[4]);
    r.nonlinearity = f[5];
    r.contrast = f[6];
    r.method = parse_method(f[7]);
    r.seed = std::stoull(f[8]);
    r.theta_true = split_vector(f[9]);
    r.theta_hat = split_vector(f[10]);
    r.mse = parse_double(f[11]);
    r.rel_err = parse_double(f[12]);
    r.converged = f[13] == "1";
    if (!f[14].empty()) r.wall_ms = parse_double(f[14]);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<ResultRecord> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_results_csv(in);
}

/// Stable 64-bit digest of the CSV text.
inline std::string digest(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

// ---------------------------------------------------------------------------
// Aggregates

struct CellKey {
  std::string scenario;
  Index n = 0, dim_x = 0, n_treat = 0;
  std::string beta;  // formatted, so NaN compares equal
  std::string nonlinearity, contrast;
  Method method = Method::ica;

  auto tie() const { return std::tie(scenario, n, dim_x, n_treat, beta, nonlinearity, contrast, method); }
  friend bool operator<(const CellKey& a, const CellKey& b) { return a.tie() < b.tie(); }
  friend bool operator==(const CellKey& a, const CellKey& b) { return a.tie() == b.tie(); }
};

/// Mean and sample standard deviation of ‖θ - θ̂‖₂ over the finite runs.
struct Aggregate {
  CellKey key;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
};

inline CellKey key_of(const ResultRecord& r) {
  return {r.scenario, r.n, r.dim_x, r.n_treat, format_double(r.beta), r.nonlinearity, r.contrast, r.method};
}

inline std::vector<Aggregate> aggregate(const std::vector<ResultRecord>& records) {
  std::vector<CellKey> order;
  std::map<CellKey, std::vector<double>> errs;
  std::map<CellKey, std::size_t> fails;
  for (const auto& r : records) {
    const CellKey k = key_of(r);
    if (!errs.count(k)) order.push_back(k);
    auto& v = errs[k];
    const double e = r.error_norm();
    if (std::isfinite(e)) v.push_back(e);
    else ++fails[k];
  }
  std::vector<Aggregate> out;
  for (const auto& k : order) {
    Aggregate a;
    a.key = k;
    std::vector<double> v = errs[k];
    a.failures = fails[k];
    a.runs = v.size() + a.failures;
    if (!v.empty()) {
      double s = 0.0;
      for (double x : v) s += x;
      a.mean = s / static_cast<double>(v.size());
      if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - a.mean) * (x - a.mean);
        a.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
      } else {
        a.sd = 0.0;
      }
      std::sort(v.begin(), v.end());
      const std::size_t h = v.size() / 2;
      a.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    }
    out.push_back(a);
  }
  return out;
}

enum class BandVerdict { first_better, second_better, overlap };

inline std::string_view to_string(BandVerdict v) {
  switch (v) {
    case BandVerdict::first_better: return "first_better";
    case BandVerdict::second_better: return "second_better";
    case BandVerdict::overlap: return "overlap";
  }
  return "unknown";
}

/// Lower error wins only when the mean ± 1 sd bands are disjoint.
inline BandVerdict compare_bands(const Aggregate& a, const Aggregate& b) {
  if (a.mean + a.sd < b.mean - b.sd) return BandVerdict::first_better;
  if (b.mean + b.sd < a.mean - a.sd) return BandVerdict::second_better;
  return BandVerdict::overlap;
}

// ---------------------------------------------------------------------------
// Named scenarios and config files

inline std::vector<std::string> scenario_names() {
  return {"homl_linear", "homl_beta",  "variance_confounding", "multi_treatment",
          "nonlinear", "contrast_ablation", "sparsity_ablation", "location_scale",
          "leaky_slopes", "shared_coefficients", "default_test"};
}

inline ScenarioConfig named_scenario(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  PlrSpec& s = c.plr;
  s.random_coefficients = true;
  s.theta = Vector::Constant(1, 3.0);
  const NoiseSpec lap = NoiseSpec::laplace();
  s.noise_x = s.noise_t = s.noise_y = lap;

  auto homl_setup = [&] {
    // generalized-normal covariates, three-point treatment, uniform outcome noise
    s.noise_x = NoiseSpec::generalized_normal(1.0);
    s.noise_t = NoiseSpec::three_point();
    s.noise_y = NoiseSpec::uniform();
    c.methods = {Method::ica, Method::homl, Method::oml};
  };

  if (name == "homl_linear") {
    homl_setup();
    c.beta_values = {1.0};
  } else if (name == "homl_beta") {
    homl_setup();
    c.covariate_dims = {10};
    c.beta_values = {0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
  } else if (name == "variance_confounding") {
    c.sample_sizes = {10000};
    c.covariate_dims = {10};
    c.coefficient_values = {0.0, 0.5, 1.0};
    s.theta = Vector::Constant(1, 1.0);
    c.methods = {Method::ica, Method::homl};
    c.seeds = 100;
  } else if (name == "multi_treatment") {
    c.treatment_counts = {1, 2, 5};
    c.theta_pool = default_theta_pool();
    c.methods = {Method::ica, Method::ols};
  } else if (name == "nonlinear") {
    c.sample_sizes = {5000};
    c.nonlinearities = {"relu", "leaky_relu", "sigmoid", "tanh"};
    s.theta = Vector::Constant(1, 1.55);
  } else if (name == "contrast_ablation") {
    c.sample_sizes = {5000};
    c.covariate_dims = {50};
    c.contrasts = {"logcosh", "exp", "cube"};
    s.theta = Vector::Constant(1, 1.55);
  } else if (name == "sparsity_ablation") {
    c.sample_sizes = {5000};
    c.covariate_dims = {50};
    c.keep_probs = {0.2, 0.4, 0.6, 0.8, 1.0};
    s.theta = Vector::Constant(1, 1.55);
  } else if (name == "location_scale") {
    c.sample_sizes = {5000};
    c.covariate_dims = {50};
    c.locations = {-2.0, 0.0, 2.0};
    c.scales = {0.5, 1.0, 2.0};
    s.theta = Vector::Constant(1, 1.55);
  } else if (name == "leaky_slopes") {
    c.sample_sizes = {5000};
    c.nonlinearities = {"leaky_relu"};
    c.leaky_slopes = {0.05, 0.1, 0.2, 0.5, 0.8};
    s.theta = Vector::Constant(1, 1.55);
  } else if (name == "shared_coefficients") {
    homl_setup();
    c.beta_values = {1.0};
    c.methods = {Method::ica};
    c.same_coefficients = true;
  } else if (name == "default_test") {
    c.sample_sizes = {500, 1000};
    c.covariate_dims = {2};
    c.seeds = 3;
    c.methods = {Method::ica, Method::oml, Method::homl, Method::ols};
  } else {
    throw ConfigError("unknown scenario '" + name + "'");
  }
  return c;
}

namespace detail {
inline std::vector<Index> to_index(const std::vector<long long>& v) { return {v.begin(), v.end()}; }
}  // namespace detail

/// Reads a scenario file. `scenario = <name>` starts from a built-in preset;
/// every other key overrides it.
inline ScenarioConfig read_scenario(KeyValueConfig& kv) {
  ScenarioConfig c = kv.has("scenario") ? named_scenario(kv.scalar("scenario")) : ScenarioConfig{};
  if (!kv.has("scenario")) c.plr.theta = Vector::Constant(1, 3.0);
  try {
    c.name = kv.get_string("name", c.name);
    c.plr = read_plr_spec(kv, c.plr);
    auto idx = [&](const char* key, std::vector<Index>& dst) {
      if (kv.has(key)) dst = detail::to_index(kv.get_ints(key, {}));
    };
    idx("sample_sizes", c.sample_sizes);
    idx("covariate_dims", c.covariate_dims);
    idx("treatment_counts", c.treatment_counts);
    if (!kv.has("covariate_dims") && kv.has("p")) c.covariate_dims = {c.plr.p};
    if (!kv.has("treatment_counts") && kv.has("m")) c.treatment_counts = {c.plr.m};
    c.beta_values = kv.get_doubles("beta_values", c.beta_values);
    c.nonlinearities = kv.get_strings("nonlinearities", c.nonlinearities);
    c.leaky_slopes = kv.get_doubles("leaky_slopes", c.leaky_slopes);
    c.locations = kv.get_doubles("locations", c.locations);
    c.scales = kv.get_doubles("scales", c.scales);
    c.keep_probs = kv.get_doubles("keep_probs", c.keep_probs);
    c.coefficient_values = kv.get_doubles("coefficient_values", c.coefficient_values);
    c.contrasts = kv.get_strings("contrasts", c.contrasts);
    c.seeds = static_cast<int>(kv.get_int("seeds", c.seeds));
    c.base_seed = static_cast<std::uint64_t>(kv.get_int("base_seed", static_cast<long long>(c.base_seed)));
    if (kv.has("methods")) {
      c.methods.clear();
      for (const auto& m : kv.list("methods")) c.methods.push_back(parse_method(m));
    }
    c.theta_pool = kv.get_doubles("theta_pool", c.theta_pool);
    c.same_coefficients = kv.get_bool("same_coefficients", c.same_coefficients);
    c.multi_match = kv.get_bool("multi_match", c.multi_match);
    c.ica.tol = kv.get_double("ica_tol", c.ica.tol);
    c.ica.max_iter = static_cast<int>(kv.get_int("ica_max_iter", c.ica.max_iter));
    if (kv.has("ica_mode")) c.ica.mode = parse_ica_mode(kv.scalar("ica_mode"));
    c.nuisance.lambda_scale = kv.get_double("lambda_scale", c.nuisance.lambda_scale);
    c.nuisance.folds = static_cast<int>(kv.get_int("folds", c.nuisance.folds));
    c.nuisance.tol = kv.get_double("nuisance_tol", c.nuisance.tol);
    c.nuisance.max_iter = static_cast<int>(kv.get_int("nuisance_max_iter", c.nuisance.max_iter));
    c.workers = static_cast<int>(kv.get_int("workers", c.workers));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  kv.finish();
  c.validate();
  try {
    expand_cells(c);  // surfaces shape errors before any run
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  KeyValueConfig kv = KeyValueConfig::load(path);
  return read_scenario(kv);
}

inline ScenarioConfig parse_scenario(const std::string& text) {
  KeyValueConfig kv = KeyValueConfig::parse(text);
  return read_scenario(kv);
}

}  // namespace plrica
