#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "plrica/baselines.hpp"

using namespace plrica;

namespace {

PlrSpec default_linear(Index p) {
  PlrSpec s;
  s.p = p;
  s.m = 1;
  s.random_coefficients = true;
  s.theta = Vector::Constant(1, 3.0);
  return s;
}

double corr(const Vector& a, const Vector& b) {
  const Vector x = a.array() - a.mean(), y = b.array() - b.mean();
  return x.dot(y) / (x.norm() * y.norm());
}

}  // namespace

TEST(Nuisance, NoiselessRecoveryAtZeroPenalty) {
  PlrSpec s = default_linear(4);
  s.standardize_noise = false;
  s.noise_t = s.noise_y = NoiseSpec::laplace(0.0, 1e-9);
  const Dataset ds = simulate(s, 1000, 1);
  const NuisanceFit f = fit_nuisance(ds, {0.0, 2, 1e-12, 10000});
  EXPECT_DOUBLE_EQ(f.lambda, 0.0);
  EXPECT_LE((f.residual_t.col(0) - ds.ground_truth->sources.col(4)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Nuisance, NullPenaltyPredictsTrainingMeans) {
  PlrSpec s = PlrSpec::scalar_linear(0.0, 0.0, 1.0);
  const Dataset ds = simulate(s, 400, 2);
  const NuisanceFit f = fit_nuisance(ds, {1e6, 2, 1e-4, 1000});
  const Vector t = ds.treatments().col(0);
  for (int k = 0; k < 2; ++k) {
    double mean = 0.0;
    int cnt = 0;
    for (Index i = 0; i < ds.n(); ++i) {
      if (f.fold_assignment[static_cast<std::size_t>(i)] != k) {
        mean += t(i);
        ++cnt;
      }
    }
    mean /= cnt;
    for (Index i = 0; i < ds.n(); ++i) {
      if (f.fold_assignment[static_cast<std::size_t>(i)] == k) {
        EXPECT_NEAR(f.predictions_t(i, 0), mean, 1e-12);
      }
    }
  }
}

TEST(Nuisance, ResidualTracksTreatmentNoise) {
  const Dataset ds = simulate(default_linear(10), 5000, 3);
  const NuisanceFit f = fit_nuisance(ds);
  EXPECT_NEAR(f.lambda, std::sqrt(std::log(12.0) / 5000.0), 1e-15);
  EXPECT_GE(corr(f.residual_t.col(0), ds.ground_truth->sources.col(10)), 0.95);
}

TEST(Nuisance, PredictionsNeverSeeTheirOwnRow) {
  const Dataset ds = simulate(default_linear(3), 200, 4);
  const NuisanceFit base = fit_nuisance(ds);
  for (Index i : {0, 17, 101}) {
    Dataset poked = ds;
    poked.columns(i, ds.column_of(Role::treatment)) += 1000.0;
    poked.columns(i, ds.column_of(Role::outcome)) -= 1000.0;
    const NuisanceFit f = fit_nuisance(poked);
    EXPECT_EQ(f.predictions_t(i, 0), base.predictions_t(i, 0));
    EXPECT_EQ(f.predictions_y(i), base.predictions_y(i));
  }
}

TEST(Nuisance, FoldTooSmall) {
  const Dataset ds = simulate(PlrSpec::scalar_linear(1, 1, 1), 3, 1);
  EXPECT_THROW(fit_nuisance(ds), InvalidArgument);
}

TEST(Oml, ExactAndOrthogonal) {
  Vector rt(4), ry(4);
  rt << 1, -2, 0.5, 3;
  EXPECT_DOUBLE_EQ(oml_estimate(Vector(3.0 * rt), rt).theta_hat(0), 3.0);
  ry << 2, 1, 0, 0;  // ⟂ (1, -2, 0.5, 3)
  EXPECT_DOUBLE_EQ(oml_estimate(ry, rt).theta_hat(0), 0.0);
  EXPECT_THROW(oml_estimate(ry, Vector(Vector::Zero(4))), DegenerateMoment);
}

TEST(Oml, ExactNuisanceNoOutcomeNoise) {
  const Vector eta = sample(NoiseSpec::laplace(), 1000, 5);
  const EffectEstimate e = oml_estimate(Vector(2.75 * eta), eta);
  EXPECT_NEAR(e.theta_hat(0), 2.75, 4e-16 * 2.75);
}

TEST(Oml, MultipleTreatments) {
  Rng rng(6);
  Matrix rt(500, 2);
  rt.col(0) = sample(NoiseSpec::laplace(), 500, rng);
  rt.col(1) = sample(NoiseSpec::laplace(), 500, rng);
  const Vector ry = rt * Eigen::Vector2d(1.55, 0.65);
  const Vector th = oml_estimate(ry, rt).theta_hat;
  EXPECT_NEAR(th(0), 1.55, 1e-12);
  EXPECT_NEAR(th(1), 0.65, 1e-12);
}

TEST(Homl, ExactMomentSolution) {
  const Vector eta = sample(NoiseSpec::laplace(), 2000, 7);
  const HomlEstimate h = homl_estimate(Vector(-1.3 * eta), eta);
  EXPECT_NEAR(h.estimate.theta_hat(0), -1.3, 1e-13);
  EXPECT_FALSE(h.moments.degenerate);
  EXPECT_NEAR(h.moments.condition_value, 3.0, 0.6);
}

TEST(Homl, GaussianTreatmentNoiseIsDegenerate) {
  const Vector eta = sample(NoiseSpec::gaussian(), 100000, 8);
  const Vector eps = sample(NoiseSpec::laplace(), 100000, 9);
  const HomlEstimate h = homl_estimate(Vector(eta + eps), eta);
  EXPECT_TRUE(h.moments.degenerate);
  EXPECT_FALSE(h.estimate.diagnostics.converged);
}

TEST(Homl, ThreePointDenominatorIsMinusOne) {
  const Vector eta = sample(NoiseSpec::three_point(), 100000, 10);
  const HomlEstimate h = homl_estimate(eta, eta);
  EXPECT_FALSE(h.moments.degenerate);
  EXPECT_LE(std::abs(h.moments.denominator + 1.0), 3.0 * h.moments.denominator_se);
}

TEST(Homl, DenominatorMatchesClosedForm) {
  const Vector eta = sample(NoiseSpec::uniform(), 1000, 11);
  const HomlEstimate h = homl_estimate(eta, eta);
  const auto a = eta.array();
  const double m1 = a.mean(), m2 = a.square().mean(), m3 = a.cube().mean(), m4 = a.square().square().mean();
  EXPECT_NEAR(h.moments.denominator, m4 - m3 * m1 - 3.0 * m2 * m2, 1e-12);
}

TEST(Homl, DegeneracyRateOnGaussianTreatment) {
  PlrSpec s = default_linear(2);
  s.noise_t = NoiseSpec::gaussian();
  int flagged = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    flagged += estimate_homl(simulate(s, 10000, seed)).moments.degenerate ? 1 : 0;
  EXPECT_GE(flagged, 18);
}

TEST(Homl, AgreesWithOmlAtLargeN) {
  const Dataset ds = simulate(default_linear(10), 100000, 12);
  const NuisanceFit f = fit_nuisance(ds);
  const double oml = oml_estimate(f.residual_y, f.residual_t).theta_hat(0);
  const double homl = homl_estimate(f.residual_y, Vector(f.residual_t.col(0))).estimate.theta_hat(0);
  EXPECT_LE(std::abs(homl - oml), 0.05);
}

TEST(Homl, RejectsMultipleTreatments) {
  PlrSpec s = default_linear(2);
  s.m = 2;
  s.theta = Eigen::Vector2d(1, 2);
  EXPECT_THROW(estimate_homl(simulate(s, 100, 1)), InvalidArgument);
}

TEST(CrossFit, FoldRelabelingOnlyMovesWithinNoise) {
  const Dataset ds = simulate(default_linear(5), 5000, 13);
  const NuisanceOptions o;
  const NuisanceFit base = fit_nuisance(ds, o);
  const double a = oml_estimate(base.residual_y, base.residual_t).theta_hat(0);
  std::vector<int> folds = default_folds(ds.n(), 2);
  std::mt19937_64 rng(3);
  std::shuffle(folds.begin(), folds.end(), rng);
  const NuisanceFit f = fit_nuisance(ds, o, folds);
  const double b = oml_estimate(f.residual_y, f.residual_t).theta_hat(0);
  EXPECT_LE(std::abs(a - b), 0.05);
}

TEST(Ols, NoiselessRecovery) {
  PlrSpec s = default_linear(5);
  s.m = 2;
  s.theta = Eigen::Vector2d(1.55, 0.65);
  s.standardize_noise = false;
  s.noise_y = NoiseSpec::laplace(0.0, 1e-12);
  const Vector th = ols_joint(simulate(s, 500, 14)).theta_hat;
  EXPECT_NEAR(th(0), 1.55, 1e-8);
  EXPECT_NEAR(th(1), 0.65, 1e-8);
}

TEST(Ols, OmittedCovariateBias) {
  // scalar, unit-variance ξ and η: plim = θ + ab/(a² + 1)
  const double a = 1.0, b = 1.0, theta = 3.0;
  const Dataset ds = simulate(PlrSpec::scalar_linear(a, b, theta), 200000, 15);
  const Matrix none(ds.n(), 0);
  const double got = ols_joint(ds.treatments(), none, ds.outcome()).theta_hat(0);
  EXPECT_NEAR(got, theta + a * b / (a * a + 1.0), 0.02);
}

TEST(Ols, RankDeficientDesign) {
  Dataset ds = simulate(PlrSpec::scalar_linear(1, 1, 1), 100, 1);
  ds.columns.col(1) = ds.columns.col(0);
  EXPECT_THROW(ols_joint(ds), SingularMatrix);
}
