#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "plrica/experiment.hpp"

using namespace plrica;

namespace {

ScenarioConfig tiny() {
  ScenarioConfig c;
  c.name = "tiny";
  c.plr.random_coefficients = true;
  c.plr.theta = Vector::Constant(1, 3.0);
  c.sample_sizes = {300};
  c.covariate_dims = {2};
  c.seeds = 1;
  c.methods = {Method::ica};
  return c;
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(Scenario, SingleCellSingleSeedOneRecord) {
  const auto recs = run_scenario(tiny());
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_TRUE(recs[0].converged);
  EXPECT_EQ(recs[0].n, 300);
}

TEST(Scenario, DefaultLinearScenarioConverges) {
  ScenarioConfig c = tiny();
  c.sample_sizes = {5000};
  c.covariate_dims = {10};
  c.seeds = 20;
  const auto recs = run_scenario(c);
  ASSERT_EQ(recs.size(), 20u);
  for (const auto& r : recs) EXPECT_TRUE(r.converged) << r.seed;
}

TEST(Scenario, SweepIsCartesian) {
  ScenarioConfig c = tiny();
  c.sample_sizes = {200, 300};
  c.covariate_dims = {1, 2, 3};
  c.contrasts = {"logcosh", "cube"};
  c.methods = {Method::ica, Method::ols};
  c.seeds = 2;
  const auto cells = expand_cells(c);
  ASSERT_EQ(cells.size(), 12u);
  EXPECT_EQ(cells[0].contrast, "logcosh");
  EXPECT_EQ(cells[1].contrast, "cube");
  EXPECT_EQ(cells[2].p, 2);
  EXPECT_EQ(run_scenario(c).size(), 48u);
}

TEST(Scenario, InvalidConfigs) {
  ScenarioConfig c = tiny();
  c.seeds = 0;
  EXPECT_THROW(run_scenario(c), ConfigError);
  c = tiny();
  c.sample_sizes.clear();
  EXPECT_THROW(run_scenario(c), ConfigError);
}

TEST(Scenario, SeedsDependOnCellAndIndex) {
  ScenarioConfig c = tiny();
  c.sample_sizes = {200, 300};
  const auto cells = expand_cells(c);
  EXPECT_NE(run_seed(c, cells[0], 0), run_seed(c, cells[1], 0));
  EXPECT_NE(run_seed(c, cells[0], 0), run_seed(c, cells[0], 1));
  EXPECT_EQ(run_seed(c, cells[0], 3), run_seed(c, expand_cells(c)[0], 3));
}

TEST(Scenario, RecordReproducibleFromStoredSeed) {
  ScenarioConfig c = tiny();
  c.seeds = 3;
  c.methods = {Method::ica, Method::oml};
  const auto recs = run_scenario(c);
  const Cell cell = expand_cells(c)[0];
  const auto again = run_cell(c, cell, recs[3].seed);
  EXPECT_EQ(emit_csv({recs[2], recs[3]}), emit_csv(again));
}

TEST(Scenario, FailuresAreRecordedNotThrown) {
  ScenarioConfig c = tiny();
  c.plr.noise_t = NoiseSpec::gaussian();
  c.methods = {Method::homl, Method::ica};
  c.plr.theta = Eigen::Vector2d(1, 2);
  c.treatment_counts = {2};
  std::vector<ResultRecord> recs;
  ASSERT_NO_THROW(recs = run_scenario(c));
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_FALSE(recs[0].converged);
  EXPECT_FALSE(recs[0].notes.empty());
  EXPECT_TRUE(std::isnan(recs[0].mse));
  EXPECT_TRUE(std::isfinite(recs[1].mse));
}

TEST(Scenario, DeterministicAcrossWorkers) {
  ScenarioConfig c = named_scenario("default_test");
  const std::string one = emit_csv(run_scenario(c));
  c.workers = 4;
  const std::string four = emit_csv(run_scenario(c));
  EXPECT_EQ(digest(one), digest(four));
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, emit_csv(run_scenario(c)));
}

TEST(Metrics, Examples) {
  const Vector th = Eigen::Vector2d(1.55, 0.65);
  EXPECT_EQ(metrics(th, th, false).mse, 0.0);
  EXPECT_EQ(metrics(th, Eigen::Vector2d(0.65, 1.55), true).mse, 0.0);
  EXPECT_NEAR(metrics(th, Eigen::Vector2d(0.65, 1.55), false).mse, 2 * 0.81, 1e-12);
  const Metrics m = metrics(Vector::Constant(1, 3.0), Vector::Constant(1, 2.5), true);
  EXPECT_DOUBLE_EQ(m.rel_err, 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.mse, 0.25);
  EXPECT_THROW(metrics(th, Vector::Constant(1, 1.0), true), InvalidArgument);
}

TEST(Metrics, MatchingIgnoresSign) {
  const Vector th = Eigen::Vector2d(1.0, 2.0);
  EXPECT_NEAR(metrics(th, Eigen::Vector2d(-1.0, 2.0), true).mse, 4.0, 1e-12);
}

TEST(Metrics, StoredErrorsConsistentWithVectors) {
  ScenarioConfig c = tiny();
  c.plr.theta = Eigen::Vector2d(1.55, 0.65);
  c.treatment_counts = {2};
  c.seeds = 3;
  for (const auto& r : run_scenario(c)) {
    const Metrics m = metrics(r.theta_true, r.theta_hat, true);
    EXPECT_EQ(r.mse, m.mse);
    EXPECT_NEAR(r.error_norm() / r.theta_true.norm(), r.rel_err, 1e-15);
  }
}

TEST(Csv, HeaderOnlyAndOneRecord) {
  EXPECT_EQ(emit_csv({}), std::string(kResultsHeader) + "\n");
  const auto recs = run_scenario(tiny());
  EXPECT_EQ(line_count(emit_csv(recs)), 2u);
}

TEST(Csv, RoundTripIsExact) {
  ScenarioConfig c = tiny();
  c.seeds = 2;
  c.beta_values = {1.5};
  c.methods = {Method::ica, Method::oml, Method::homl, Method::ols};
  c.timing = true;
  auto recs = run_scenario(c);
  recs[0].theta_hat(0) = 1.0 / 3.0;
  const std::string text = emit_csv(recs);
  const auto back = parse_results_csv(text);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].theta_hat(0), recs[i].theta_hat(0));
    EXPECT_EQ(back[i].seed, recs[i].seed);
    EXPECT_EQ(back[i].wall_ms.has_value(), true);
  }
  EXPECT_EQ(emit_csv(back), text);
}

TEST(Csv, WritesFileAndReportsIoErrors) {
  const std::string path = testing::TempDir() + "plrica_results.csv";
  const auto recs = run_scenario(tiny());
  emit_csv(recs, path);
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), emit_csv(recs));
  std::remove(path.c_str());
  EXPECT_THROW(emit_csv(recs, "/nonexistent/dir/out.csv"), IoError);
}

TEST(Csv, WallTimeOnlyWhenRequested) {
  const auto recs = run_scenario(tiny());
  EXPECT_FALSE(recs[0].wall_ms.has_value());
  const std::string text = emit_csv(recs);
  EXPECT_EQ(text.substr(text.size() - 2), ",\n");
}

TEST(Aggregate, ReproducibleFromCsv) {
  ScenarioConfig c = tiny();
  c.sample_sizes = {300, 600};
  c.seeds = 4;
  c.methods = {Method::ica, Method::ols};
  const auto recs = run_scenario(c);
  const auto a = aggregate(recs), b = aggregate(parse_results_csv(emit_csv(recs)));
  ASSERT_EQ(a.size(), 4u);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].runs, 4u);
    EXPECT_EQ(a[i].mean, b[i].mean);
    EXPECT_EQ(a[i].sd, b[i].sd);
    EXPECT_EQ(a[i].median, b[i].median);
  }
}

TEST(Aggregate, MeanSdMedian) {
  std::vector<ResultRecord> recs(3);
  const double errs[] = {1.0, 2.0, 4.0};
  for (int i = 0; i < 3; ++i) {
    recs[static_cast<std::size_t>(i)].scenario = "s";
    recs[static_cast<std::size_t>(i)].mse = errs[i] * errs[i];
  }
  ResultRecord failed = recs[0];
  failed.mse = std::numeric_limits<double>::quiet_NaN();
  recs.push_back(failed);
  const Aggregate a = aggregate(recs).at(0);
  EXPECT_EQ(a.runs, 4u);
  EXPECT_EQ(a.failures, 1u);
  EXPECT_DOUBLE_EQ(a.mean, 7.0 / 3.0);
  EXPECT_DOUBLE_EQ(a.sd, std::sqrt(((4.0 / 3) * (4.0 / 3) + (1.0 / 3) * (1.0 / 3) + (5.0 / 3) * (5.0 / 3)) / 2));
  EXPECT_DOUBLE_EQ(a.median, 2.0);
}

TEST(Bands, OverlapDecision) {
  Aggregate a, b;
  a.mean = 1.0;
  a.sd = 0.2;
  b.mean = 2.0;
  b.sd = 0.5;
  EXPECT_EQ(compare_bands(a, b), BandVerdict::first_better);
  EXPECT_EQ(compare_bands(b, a), BandVerdict::second_better);
  b.sd = 0.9;
  EXPECT_EQ(compare_bands(a, b), BandVerdict::overlap);
}

TEST(ConfigFile, PresetPlusOverrides) {
  const ScenarioConfig c = parse_scenario("scenario = multi_treatment\nsample_sizes = [1000]\nseeds = 2\n");
  EXPECT_EQ(c.name, "multi_treatment");
  EXPECT_EQ(c.sample_sizes, std::vector<Index>{1000});
  EXPECT_EQ(c.seeds, 2);
  EXPECT_EQ(c.treatment_counts, (std::vector<Index>{1, 2, 5}));
}

TEST(ConfigFile, FullSchema) {
  const ScenarioConfig c = parse_scenario(
      "name = sweep\nrandom_coefficients = true\ntheta = [1.55]\nnoise = laplace\nnoise_x = gaussian\n"
      "sample_sizes = [500, 1000]\ncovariate_dims = [3]\ncontrasts = [logcosh, exp]\nmethods = [ica, ols]\n"
      "seeds = 5\nbase_seed = 11\nica_tol = 1e-6\nica_mode = deflation\nlambda_scale = 0.5\nfolds = 3\n"
      "workers = 2\nnonlinearities = [tanh]\n");
  EXPECT_EQ(c.name, "sweep");
  EXPECT_EQ(c.plr.noise_x.family, NoiseFamily::gaussian);
  EXPECT_EQ(c.plr.noise_t.family, NoiseFamily::laplace);
  EXPECT_EQ(c.contrasts.size(), 2u);
  EXPECT_EQ(c.methods, (std::vector<Method>{Method::ica, Method::ols}));
  EXPECT_EQ(c.base_seed, 11u);
  EXPECT_EQ(c.ica.mode, IcaMode::deflation);
  EXPECT_EQ(c.nuisance.folds, 3);
  EXPECT_EQ(c.workers, 2);
}

TEST(ConfigFile, Errors) {
  EXPECT_THROW(parse_scenario("scenario = nope\n"), ConfigError);
  EXPECT_THROW(parse_scenario("sample_size = [100]\n"), ConfigError);
  EXPECT_THROW(parse_scenario("methods = [ica, magic]\n"), ConfigError);
  EXPECT_THROW(parse_scenario("seeds = 0\n"), ConfigError);
  EXPECT_THROW(parse_scenario("p = 2\nm = 1\na = [1, 1]\nb = [1]\n"), ConfigError);
}

TEST(Named, AllPresetsExpand) {
  for (const auto& name : scenario_names()) {
    const ScenarioConfig c = named_scenario(name);
    EXPECT_FALSE(expand_cells(c).empty()) << name;
  }
}
