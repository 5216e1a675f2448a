#include <gtest/gtest.h>

#include "oracles.hpp"
#include "synthctl/synthctl.hpp"

using namespace synthctl;

namespace {

// treated + 3 donors, 3 pre-periods and 1 post-period
Panel hand_panel() {
  Eigen::MatrixXd y(4, 4);
  y << 2.0, 2.4, 2.1, 3.9,
       1.0, 1.5, 1.2, 1.6,
       3.0, 2.8, 3.3, 3.1,
       2.5, 2.0, 2.9, 2.2;
  return fixture::panel(y, 2000, 2003);
}

}  // namespace

TEST(RidgeAscm, MatchesClosedFormOnHandInstance) {
  const Panel p = hand_panel();
  const Eigen::MatrixXd z = p.donor_outcomes().topRows(3).transpose();  // donors x pre
  const Eigen::MatrixXd y = p.donor_outcomes().bottomRows(1).transpose();
  for (double lambda : {0.1, 1.0, 7.5}) {
    AugmentedOptions o;
    o.lambda = lambda;
    const AugmentedFit a = ridge_ascm(p, fixture::outcome_lags(p), o);
    const Eigen::MatrixXd eta = oracle::ridge_3feature(z, y, lambda);
    ASSERT_EQ(a.ridge_coefficients.rows(), 3);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.ridge_coefficients(i, 0), eta(i, 0), 1e-9);
    const Eigen::Vector3d z1 = p.treated_outcomes().head(3);
    const Eigen::Vector3d imbalance = z1 - z.transpose() * a.base.weights.w;
    const double correction = imbalance.dot(eta.col(0));
    EXPECT_NEAR(a.correction[0], correction, 1e-9);
    const double synth = y.col(0).dot(a.base.weights.w) + correction;
    EXPECT_NEAR(a.corrected_synthetic.values[0], synth, 1e-9);
    EXPECT_NEAR(a.corrected_effect, 3.9 - synth, 1e-9);
    EXPECT_NEAR(a.corrected_effect, a.base_effect - correction, 1e-12);
  }
}

TEST(RidgeAscm, InfinitePenaltyLimit) {
  FactorModelConfig c;
  const Panel p = generate(c);
  AugmentedOptions o;
  o.lambda = 1e12;
  const AugmentedFit a = ridge_ascm(p, simulation_spec(p), o);
  EXPECT_LE(a.correction.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(a.corrected_effect, average_effect(p, a.base).mean_gap, 1e-6);
}

TEST(RidgeAscm, ZeroImbalanceLeavesEstimateUnchanged) {
  FactorModelConfig c;
  c.noise_sd = 0.0;
  c.treatment_effect = {1.5};
  const Panel p = generate(c);
  const AugmentedFit a = ridge_ascm(p, simulation_spec(p));
  EXPECT_LE(a.imbalance.cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(a.corrected_effect, a.base_effect, 1e-9);
  EXPECT_NEAR(a.corrected_effect, 1.5, 1e-6);
}

TEST(RidgeAscm, ExactZeroImbalanceAgreesTo1e12) {
  Eigen::MatrixXd y(4, 5);
  y << 1.0, 2.0, 1.5, 3.0, 3.2,
       1.0, 2.0, 1.5, 2.0, 2.1,
       0.0, 1.0, 4.0, 1.0, 1.5,
       3.0, 0.5, 2.0, 2.5, 0.5;
  const Panel p = fixture::panel(y, 2000, 2003);
  const AugmentedFit a = ridge_ascm(p, fixture::outcome_lags(p));
  EXPECT_NEAR(a.base.weights[0], 1.0, 1e-12);
  EXPECT_NEAR(a.corrected_effect, a.base_effect, 1e-12);
}

TEST(RidgeAscm, SingularDesignWithZeroPenalty) {
  FactorModelConfig c;
  c.n_donors = 3;
  const Panel p = generate(c);  // 3 donors, 5 pre-periods: Z'Z is rank 3
  AugmentedOptions o;
  o.lambda = 0.0;
  try {
    ridge_ascm(p, simulation_spec(p), o);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("positive penalty"), std::string::npos);
  }
}

TEST(RidgeAscm, AutoLambdaFromGridDeterministic) {
  FactorModelConfig c;
  c.seed = 3;
  const Panel p = generate(c);
  const AugmentedFit a = ridge_ascm(p, simulation_spec(p));
  const AugmentedFit b = ridge_ascm(p, simulation_spec(p));
  EXPECT_TRUE(a.lambda_auto);
  EXPECT_EQ(a.lambda_grid.size(), 30u);
  EXPECT_EQ(a.cv_error.size(), 30u);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_NE(std::find(a.lambda_grid.begin(), a.lambda_grid.end(), a.lambda), a.lambda_grid.end());
  const Eigen::MatrixXd z = p.donor_outcomes().topRows(p.pre_count()).transpose();
  const double mean_diag = (z.transpose() * z).diagonal().mean();
  EXPECT_NEAR(a.lambda_grid.front(), 1e-6 * mean_diag, 1e-12 * mean_diag);
  EXPECT_NEAR(a.lambda_grid.back(), 1e6 * mean_diag, 1e-3 * mean_diag);
  const auto best = std::min_element(a.cv_error.begin(), a.cv_error.end()) - a.cv_error.begin();
  EXPECT_EQ(a.lambda, a.lambda_grid[static_cast<std::size_t>(best)]);
}

TEST(RidgeAscm, AutoLambdaNeedsThreeDonors) {
  FactorModelConfig c;
  c.n_donors = 2;
  const Panel p = generate(c);
  EXPECT_THROW(ridge_ascm(p, simulation_spec(p)), ValidationError);
}

TEST(RidgeAscm, CoefficientNormShrinksWithPenalty) {
  FactorModelConfig c;
  c.noise_sd = 0.0;
  c.n_factors = 3;
  c.treatment_effect = {0.0};
  const Panel p = generate(c);
  PredictorSpec spec;
  spec.names = {"unit_effect"};
  const ScmFit base = solve_outer(p, spec);
  double last = std::numeric_limits<double>::infinity();
  double corr = 0.0;
  for (double lambda = 1e-3; lambda <= 1e9; lambda *= 3.0) {
    AugmentedOptions o;
    o.lambda = lambda;
    const AugmentedFit a = ridge_augment(p, base, o);
    const double norm = a.ridge_coefficients.norm();
    EXPECT_LE(norm, last * (1.0 + 1e-12)) << "lambda " << lambda;
    EXPECT_LE(a.correction.cwiseAbs().maxCoeff(), norm * a.imbalance.norm() * (1.0 + 1e-12));
    last = norm;
    corr = std::abs(a.corrected_effect - a.base_effect);
  }
  EXPECT_LE(corr, 1e-5);
}

TEST(RidgeAscm, CorrectionShrinksWithPenalty) {
  FactorModelConfig c;
  c.noise_sd = 0.0;
  c.n_factors = 3;
  c.treatment_effect = {0.0};
  const Panel p = generate(c);
  PredictorSpec spec;
  spec.names = {"unit_effect"};
  const ScmFit base = solve_outer(p, spec);
  double last = std::numeric_limits<double>::infinity();
  double prev_effect = 0.0;
  for (double lambda = 1e-3; lambda <= 1e7; lambda *= 3.0) {
    AugmentedOptions o;
    o.lambda = lambda;
    const AugmentedFit a = ridge_augment(p, base, o);
    const double mag = std::abs(a.corrected_effect - a.base_effect);
    EXPECT_LE(mag, last + 1e-12) << "lambda " << lambda;
    if (lambda > 1e-3) {
      EXPECT_LE(std::abs(a.corrected_effect - prev_effect), 0.5);
    }
    last = mag;
    prev_effect = a.corrected_effect;
  }
}

TEST(RidgeCoefficients, Rejections) {
  EXPECT_THROW(ridge_coefficients(Eigen::MatrixXd::Ones(3, 2), Eigen::MatrixXd::Ones(2, 1), 1.0), DomainError);
  EXPECT_THROW(ridge_coefficients(Eigen::MatrixXd::Ones(3, 2), Eigen::MatrixXd::Ones(3, 1), -1.0), DomainError);
}
