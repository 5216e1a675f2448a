#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "synthctl/synthctl.hpp"

using namespace synthctl;

TEST(Datagen, DefaultsShapeAndNames) {
  const FactorModelConfig c;
  EXPECT_EQ(c.n_donors, 9);
  EXPECT_EQ(c.n_pre, 5);
  EXPECT_EQ(c.n_post, 5);
  EXPECT_DOUBLE_EQ(c.noise_sd, 0.1);
  EXPECT_DOUBLE_EQ(c.treatment_effect.at(0), 0.9);
  const Panel p = generate(c);
  EXPECT_EQ(p.unit_count(), 10u);
  EXPECT_EQ(p.period_count(), 10u);
  EXPECT_EQ(p.treated_unit(), "treated");
  EXPECT_EQ(p.units().front(), "donor01");
  EXPECT_EQ(p.t0(), 2015);
}

TEST(Datagen, SeedDeterminism) {
  FactorModelConfig c;
  c.seed = 42;
  const auto a = generate_detailed(c), b = generate_detailed(c);
  EXPECT_EQ(a.panel.outcomes(), b.panel.outcomes());
  EXPECT_EQ(a.vkm, b.vkm);
  EXPECT_EQ(a.mix, b.mix);
  c.seed = 43;
  EXPECT_NE(generate(c).outcomes(), a.panel.outcomes());
}

TEST(Datagen, HullPropertyAtZeroNoise) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    FactorModelConfig c;
    c.seed = seed;
    c.noise_sd = 0.0;
    c.n_factors = 1 + static_cast<int>(seed % 4);
    const auto s = generate_detailed(c);
    const Panel& p = s.panel;
    EXPECT_TRUE(WeightVector{s.mix}.on_simplex());
    const Eigen::VectorXd resid = s.untreated.row(static_cast<Eigen::Index>(p.treated_index())).transpose() -
                                  p.donor_outcomes() * s.mix;
    EXPECT_LE(resid.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Datagen, InjectedEffectOnTreatedPostCellsOnly) {
  FactorModelConfig c;
  c.treatment_effect = {0.1, 0.2, 0.3, 0.4, 0.5};
  const auto s = generate_detailed(c);
  const Eigen::MatrixXd diff = s.panel.outcomes() - s.untreated;
  const auto t = static_cast<Eigen::Index>(s.panel.treated_index());
  for (Eigen::Index i = 0; i < diff.rows(); ++i)
    for (Eigen::Index k = 0; k < diff.cols(); ++k) {
      const double expect = (i == t && k >= 5) ? c.treatment_effect[static_cast<std::size_t>(k - 5)] : 0.0;
      EXPECT_NEAR(diff(i, k), expect, 1e-12);
    }
}

TEST(Datagen, GivenMixIsUsed) {
  FactorModelConfig c;
  c.n_donors = 3;
  c.treated_loading_mix = std::vector<double>{0.2, 0.0, 0.8};
  const auto s = generate_detailed(c);
  EXPECT_DOUBLE_EQ(s.mix[0], 0.2);
  EXPECT_DOUBLE_EQ(s.mix[2], 0.8);
}

TEST(Datagen, SupplySeries) {
  const auto s = generate_detailed(FactorModelConfig{});
  EXPECT_GT(s.vkm.minCoeff(), 0.0);
  EXPECT_LE((s.passengers - s.panel.outcomes().cwiseProduct(s.vkm)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Datagen, ConfigValidation) {
  auto bad = [](auto edit) {
    FactorModelConfig c;
    edit(c);
    EXPECT_THROW(generate(c), ValidationError);
  };
  bad([](FactorModelConfig& c) { c.n_donors = 1; });
  bad([](FactorModelConfig& c) { c.n_pre = 1; });
  bad([](FactorModelConfig& c) { c.n_post = 0; });
  bad([](FactorModelConfig& c) { c.noise_sd = -0.1; });
  bad([](FactorModelConfig& c) { c.treatment_effect = {1.0, 2.0}; });
  bad([](FactorModelConfig& c) { c.treated_loading_mix = std::vector<double>(9, 0.2); });
  bad([](FactorModelConfig& c) { c.treated_loading_mix = std::vector<double>{1.5, -0.5, 0, 0, 0, 0, 0, 0, 0}; });
}

TEST(Geneva, EmbeddedDataset) {
  const auto g = geneva_dataset();
  EXPECT_EQ(g.panel.units(), (std::vector<std::string>{"TPG", "control_mean"}));
  EXPECT_EQ(g.panel.periods().front(), 2010);
  EXPECT_EQ(g.panel.periods().back(), 2019);
  EXPECT_EQ(g.panel.t0(), 2015);
  const auto tpg = ratio_metric(g.tpg);
  for (std::size_t t = 0; t < tpg.size(); ++t)
    EXPECT_DOUBLE_EQ(std::round(tpg[t] * 10) / 10, g.tpg_metric[t]) << g.tpg.years[t];
  EXPECT_DOUBLE_EQ(std::round(197.1 / 28.9 * 10) / 10, 6.8);
  double sum = 0.0;
  for (const auto& w : g.weights) sum += w.weight;
  EXPECT_NEAR(sum, 0.999, 1e-12);
  EXPECT_EQ(g.weights.size(), 9u);
  EXPECT_DOUBLE_EQ(g.reference.average_effect, 0.91);
  EXPECT_DOUBLE_EQ(g.reference.pre_mspe, 0.0086);
  EXPECT_DOUBLE_EQ(g.reference.treated_mspe_ratio, 108.7);
  EXPECT_DOUBLE_EQ(g.reference.ci_low, 0.407);
  EXPECT_DOUBLE_EQ(g.reference.ci_high, 1.043);
}
