#include <cmath>

#include <gtest/gtest.h>

#include "plrica/asymptotics.hpp"

using namespace plrica;

namespace {

PlrSpec scalar(double a, double b, double theta, NoiseSpec noise) {
  return PlrSpec::scalar_linear(a, b, theta, noise);
}

}  // namespace

TEST(Variance, LaplaceClosedForms) {
  const MomentReport m = moments(NoiseSpec::laplace());
  EXPECT_NEAR(var_homl(m), 7.0, 1e-12);
  EXPECT_NEAR(var_ica_auddy(0.0, 0.0, 3.0, m), 10.0, 1e-12);
  EXPECT_NEAR(var_ica_hyvarinen(m), 6.0, 1e-12);
}

TEST(Variance, UniformClosedForms) {
  const MomentReport m = moments(NoiseSpec::uniform());
  EXPECT_NEAR(var_homl(m), 10.0 / 7.0, 1e-12);
  EXPECT_NEAR(var_ica_hyvarinen(m), 3.0 / 7.0, 1e-12);
  EXPECT_NEAR(compare_numerators(m).gap, 1.44, 1e-12);
}

TEST(Variance, GaussianIsDegenerate) {
  const MomentReport m = moments(NoiseSpec::gaussian());
  EXPECT_THROW(var_homl(m), DegenerateMoment);
  EXPECT_THROW(var_ica_auddy(1.0, 1.0, 1.0, m), DegenerateMoment);
  EXPECT_THROW(var_ica_hyvarinen(m), DegenerateMoment);
  const VarianceReport r = variance_report(scalar(1, 1, 1, NoiseSpec::gaussian()));
  EXPECT_TRUE(std::isnan(r.var_homl));
  EXPECT_EQ(r.regime, Regime::tie);
}

TEST(Variance, AuddyMultiplierIsLinear) {
  const MomentReport m = moments(NoiseSpec::laplace());
  const double base = var_ica_auddy(0.0, 0.0, 1.0, m);
  for (double b : {0.0, 0.5, 1.0, 2.0}) EXPECT_NEAR(var_ica_auddy(b, b, 1.0, m), (4 * b * b + 1) * base, 1e-10);
  Matrix a(2, 3);
  a << 1, 0, -1, 0.5, 2, 0;
  const Vector b = Eigen::Vector3d(0.1, -0.2, 0.3), th = Eigen::Vector2d(1.55, 0.65);
  EXPECT_NEAR(var_ica_auddy(a, b, th, m), ((b + a.transpose() * th).squaredNorm() + 1) * base, 1e-10);
}

TEST(Variance, IndependentOfEffectSizeWhenUnconfounded) {
  const MomentReport m = moments(NoiseSpec::laplace());
  EXPECT_DOUBLE_EQ(var_ica_auddy(0.0, 0.0, -2.45, m), var_ica_auddy(0.0, 0.0, 1.75, m));
}

TEST(Numerators, GapExamples) {
  EXPECT_NEAR(compare_numerators(moments(NoiseSpec::laplace())).gap, 9.0, 1e-12);
  EXPECT_EQ(compare_numerators(moments(NoiseSpec::laplace())).regime, Regime::ica_better);
  EXPECT_EQ(compare_numerators(moments(NoiseSpec::gaussian())).regime, Regime::tie);
  EXPECT_NEAR(compare_numerators(moments(NoiseSpec::three_point())).gap, 1.0, 1e-12);
}

TEST(Numerators, SymmetricGapIsSquaredKurtosisDistance) {
  for (double beta : {0.5, 1.0, 1.5, 2.5, 4.0}) {
    const MomentReport m = moments(NoiseSpec::generalized_normal(beta));
    EXPECT_NEAR(compare_numerators(m).gap, std::pow(3.0 - m.fourth_moment, 2), 1e-9) << beta;
  }
}

TEST(Numerators, GapEqualsDifferenceOfNumerators) {
  for (const NoiseSpec& s : {NoiseSpec::laplace(), NoiseSpec::uniform(), NoiseSpec::three_point(),
                             NoiseSpec::generalized_normal(0.7),
                             NoiseSpec::discrete({-1, 0, 2}, {0.3, 0.5, 0.2})}) {
    const MomentReport m = moments(s);
    const NumeratorComparison c = compare_numerators(m);
    EXPECT_NEAR(c.gap, numerator_homl(m) - numerator_ica(m), 1e-9);
    const Regime expect = c.gap > 0 ? Regime::ica_better : Regime::homl_better;
    EXPECT_EQ(c.regime, expect);
    if (c.regime == Regime::ica_better) {
      EXPECT_LT(var_ica_hyvarinen(m), var_homl(m));
    }
  }
}

TEST(Numerators, DenominatorsCoincide) {
  for (const NoiseSpec& s : {NoiseSpec::laplace(), NoiseSpec::uniform(), NoiseSpec::three_point()}) {
    const MomentReport m = moments(s);
    EXPECT_NEAR(variance_denominator_root(m), homl_condition_value(m), 1e-12);
  }
}

TEST(Numerators, MonteCarloAgreement) {
  const Vector z = sample(standardized(NoiseSpec::laplace()), 1000000, 21);
  const auto a = z.array();
  const double et = a.cube().mean(), etp = 3.0 * a.square().mean(), eet = a.square().square().mean();
  const double gap = (etp - eet) * (etp - eet) - et * et;
  EXPECT_NEAR(gap, 9.0, 0.6);
}

TEST(Report, UsesTreatmentAndOutcomeNoise) {
  PlrSpec s = scalar(0, 0, 3, NoiseSpec::laplace());
  s.noise_y = NoiseSpec::uniform();
  const VarianceReport r = variance_report(s);
  EXPECT_NEAR(r.var_homl, 7.0, 1e-12);
  EXPECT_NEAR(r.var_ica_auddy, 10.0, 1e-12);
  EXPECT_NEAR(r.var_ica_hyvarinen, 3.0 / 7.0, 1e-12);
  EXPECT_NEAR(r.numerator_gap, 9.0, 1e-12);
}

TEST(Report, RejectsRandomCoefficients) {
  PlrSpec s = scalar(1, 1, 1, NoiseSpec::laplace());
  s.random_coefficients = true;
  EXPECT_THROW(variance_report(s), InvalidArgument);
}

TEST(OutcomeWeighted, MatchesStandardizedFormAtUnitVariance) {
  const MomentReport unit = moments(standardized(NoiseSpec::laplace()));
  EXPECT_NEAR(var_homl_outcome_weighted(unit, 1.0), 7.0, 1e-10);
  EXPECT_NEAR(var_homl_outcome_weighted(unit, 2.5), 17.5, 1e-10);
  // raw Laplace(0, 1) has variance 2
  EXPECT_NEAR(var_homl_outcome_weighted(moments(NoiseSpec::laplace()), 1.0), 3.5, 1e-10);
}

TEST(Score, CrossDerivativeEqualsEffect) {
  PlrSpec s = scalar(1.0, -0.5, 3.0, NoiseSpec::laplace());
  s.noise_y = NoiseSpec::gaussian();
  const Vector x = Vector::Constant(1, 0.3), t = Vector::Constant(1, -0.7);
  EXPECT_NEAR(score_cross_derivative(s, x, t, 1.1), 3.0, 1e-4);
  s.theta(0) = 0.0;
  EXPECT_NEAR(score_cross_derivative(s, x, t, 1.1), 0.0, 1e-6);
}

TEST(Score, NonlinearNuisance) {
  PlrSpec s = scalar(0.8, 0.6, 1.55, NoiseSpec::laplace());
  s.noise_y = NoiseSpec::gaussian();
  s.nuisance = Nuisance::tanh;
  EXPECT_NEAR(score_cross_derivative(s, Vector::Constant(1, 1.2), Vector::Constant(1, 0.4), -0.3), 1.55, 1e-3);
}

TEST(Score, SecondTreatment) {
  PlrSpec s;
  s.p = 2;
  s.m = 2;
  s.a_block = Matrix::Identity(2, 2);
  s.b_block = Eigen::Vector2d(0.5, -0.5);
  s.theta = Eigen::Vector2d(1.55, 0.65);
  s.noise_y = NoiseSpec::gaussian();
  const Vector x = Eigen::Vector2d(0.1, 0.2), t = Eigen::Vector2d(-0.3, 0.9);
  EXPECT_NEAR(score_cross_derivative(s, x, t, 0.4, 1), 0.65, 1e-4);
}

TEST(Score, NonGaussianOutcomeThrows) {
  const PlrSpec s = scalar(1, 1, 1, NoiseSpec::laplace());
  EXPECT_THROW(score_cross_derivative(s, Vector::Constant(1, 0), Vector::Constant(1, 0), 0), InvalidArgument);
}
