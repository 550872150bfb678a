// plrica: simulate PLR data, estimate treatment effects, run scenario sweeps,
// print asymptotic variances.
//
// Exit codes: 0 ok, 1 other failure, 2 config/usage error, 3 I/O error.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "plrica/plrica.hpp"

namespace {

using namespace plrica;

int workers_from_env(int fallback) {
  const char* v = std::getenv("PLRICA_WORKERS");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long w = std::strtol(v, &end, 10);
  if (*end != '\0' || w < 1) throw ConfigError("PLRICA_WORKERS must be a positive integer");
  return static_cast<int>(w);
}

std::string fmt(double v) { return format_double(v); }

void print_estimate(const EffectEstimate& e) {
  std::cout << "method     " << to_string(e.method) << '\n';
  std::cout << "theta_hat  " << join_vector(e.theta_hat) << '\n';
  std::cout << "converged  " << (e.diagnostics.converged ? "true" : "false") << '\n';
  if (!std::isnan(e.diagnostics.condition_value))
    std::cout << "condition  " << fmt(e.diagnostics.condition_value) << '\n';
  if (!e.diagnostics.notes.empty()) std::cout << "notes      " << e.diagnostics.notes << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Treatment effects in partially linear models via linear ICA"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw a dataset from a spec file");
  std::string sim_spec, sim_out;
  long long sim_n = 1000;
  std::uint64_t sim_seed = 0;
  sim->add_option("--spec", sim_spec, "PLR spec file")->required();
  sim->add_option("--n", sim_n, "Number of rows")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Seed");
  sim->add_option("--out", sim_out, "Output CSV")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate treatment effects from a dataset CSV");
  std::string est_data, est_method = "ica", est_contrast = "logcosh", est_mode = "parallel";
  std::uint64_t est_seed = 0;
  double est_lambda = 1.0, est_tol = 1e-4;
  int est_folds = 2, est_iter = 1000;
  est->add_option("--data", est_data, "Dataset CSV (x_*, t_*, y columns)")->required();
  est->add_option("--method", est_method, "ica | oml | homl | ols");
  est->add_option("--contrast", est_contrast, "logcosh | exp | cube");
  est->add_option("--ica-mode", est_mode, "parallel | deflation");
  est->add_option("--seed", est_seed, "FastICA initialization seed");
  est->add_option("--tol", est_tol, "Solver tolerance");
  est->add_option("--max-iter", est_iter, "Solver iteration cap");
  est->add_option("--lambda-scale", est_lambda, "Lasso penalty multiplier");
  est->add_option("--folds", est_folds, "Cross-fitting folds");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a scenario sweep");
  std::string exp_config, exp_scenario, exp_out;
  int exp_workers = 0, exp_seeds = 0;
  bool exp_timing = false;
  auto* cfg_opt = exp->add_option("--config", exp_config, "Scenario config file");
  exp->add_option("--scenario", exp_scenario, "Built-in scenario name")->excludes(cfg_opt);
  exp->add_option("--out", exp_out, "Results CSV")->required();
  exp->add_option("--workers", exp_workers, "Worker threads (overrides PLRICA_WORKERS and config)")
      ->check(CLI::PositiveNumber);
  exp->add_option("--seeds", exp_seeds, "Override the seed count")->check(CLI::PositiveNumber);
  exp->add_flag("--timing", exp_timing, "Fill the wall_ms column (makes output non-deterministic)");

  // variance
  auto* var = app.add_subcommand("variance", "Asymptotic variances for a spec");
  std::string var_spec;
  bool var_csv = false;
  var->add_option("--spec", var_spec, "PLR spec file with fixed coefficients")->required();
  var->add_flag("--csv", var_csv, "Also print a CSV header and row");

  auto* list = app.add_subcommand("scenarios", "List built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      const PlrSpec spec = load_plr_spec(sim_spec);
      write_csv(simulate(spec, static_cast<Index>(sim_n), sim_seed), sim_out);
      return 0;
    }
    if (*est) {
      Method method;
      FastIcaOptions o;
      try {
        method = parse_method(est_method);
        o.contrast = parse_contrast(est_contrast);
        o.mode = parse_ica_mode(est_mode);
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
      const Dataset ds = read_csv(est_data);
      NuisanceOptions no{est_lambda, est_folds, est_tol, est_iter};
      switch (method) {
        case Method::ica: {
          o.seed = est_seed;
          o.tol = est_tol;
          o.max_iter = est_iter;
          print_estimate(estimate_ica(ds, o));
          break;
        }
        case Method::oml: print_estimate(estimate_oml(ds, no)); break;
        case Method::homl: {
          const HomlEstimate h = estimate_homl(ds, no);
          print_estimate(h.estimate);
          std::cout << "denominator " << fmt(h.moments.denominator) << " (threshold " << fmt(h.moments.threshold)
                    << ")\n";
          std::cout << "excess_kurtosis " << fmt(h.moments.condition_value) << '\n';
          break;
        }
        case Method::ols: print_estimate(ols_joint(ds)); break;
      }
      return 0;
    }
    if (*exp) {
      if (exp_config.empty() && exp_scenario.empty()) throw ConfigError("experiment needs --config or --scenario");
      ScenarioConfig cfg = exp_config.empty() ? named_scenario(exp_scenario) : load_scenario(exp_config);
      cfg.workers = exp_workers > 0 ? exp_workers : workers_from_env(cfg.workers);
      if (exp_seeds > 0) cfg.seeds = exp_seeds;
      cfg.timing = exp_timing;
      const auto records = run_scenario(cfg);
      const std::string csv = emit_csv(records);
      {
        std::ofstream f(exp_out);
        if (!f) throw IoError("cannot open '" + exp_out + "' for writing");
        f << csv;
        if (!f) throw IoError("write to '" + exp_out + "' failed");
      }
      std::printf("%-40s %6s %5s %3s %-8s %-6s %5s %12s %12s %12s\n", "scenario", "n", "dim_x", "m", "nonlin",
                  "method", "runs", "mean_err", "sd_err", "median_err");
      for (const auto& a : aggregate(records))
        std::printf("%-40s %6lld %5lld %3lld %-8s %-6s %5zu %12.5g %12.5g %12.5g\n", a.key.scenario.c_str(),
                    static_cast<long long>(a.key.n), static_cast<long long>(a.key.dim_x),
                    static_cast<long long>(a.key.n_treat), a.key.nonlinearity.c_str(),
                    std::string(to_string(a.key.method)).c_str(), a.runs, a.mean, a.sd, a.median);
      std::printf("records %zu digest %s\n", records.size(), digest(csv).c_str());
      return 0;
    }
    if (*var) {
      const PlrSpec spec = load_plr_spec(var_spec);
      const VarianceReport r = variance_report(spec);
      std::printf("var_homl           %.10g\n", r.var_homl);
      std::printf("var_ica_auddy      %.10g\n", r.var_ica_auddy);
      std::printf("var_ica_hyvarinen  %.10g\n", r.var_ica_hyvarinen);
      std::printf("numerator_gap      %.10g\n", r.numerator_gap);
      std::printf("regime             %s\n", std::string(to_string(r.regime)).c_str());
      if (var_csv) {
        std::printf("var_homl,var_ica_auddy,var_ica_hyvarinen,numerator_gap,regime\n");
        std::printf("%s,%s,%s,%s,%s\n", fmt(r.var_homl).c_str(), fmt(r.var_ica_auddy).c_str(),
                    fmt(r.var_ica_hyvarinen).c_str(), fmt(r.numerator_gap).c_str(),
                    std::string(to_string(r.regime)).c_str());
      }
      return 0;
    }
    if (*list) {
      for (const auto& n : scenario_names()) std::cout << n << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
