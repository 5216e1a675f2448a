#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "synthctl/synthctl.hpp"

using namespace synthctl;

namespace {

Panel strong_effect_panel(std::uint64_t seed) {
  FactorModelConfig c;
  c.seed = seed;
  c.treatment_effect = {1.0};
  return generate(c);
}

}  // namespace

TEST(MspeRatio, Arithmetic) {
  ScmFit f;
  f.pre_mspe = 0.5;
  f.post_mspe = 2.0;
  EXPECT_DOUBLE_EQ(mspe_ratio(f).value, 4.0);
  f.post_mspe = 0.5;
  EXPECT_DOUBLE_EQ(mspe_ratio(f).value, 1.0);
  f.pre_mspe = 0.0;
  EXPECT_TRUE(mspe_ratio(f).infinite);
}

TEST(PlaceboRank, Convention) {
  const std::vector<double> r{3.0, 1.0, 2.0, 0.5};
  EXPECT_EQ(placebo_rank(3.0, r).rank, 1);
  EXPECT_DOUBLE_EQ(placebo_rank(3.0, r).p_value, 0.25);
  EXPECT_EQ(placebo_rank(0.5, r).rank, 4);
  EXPECT_DOUBLE_EQ(placebo_rank(0.5, r).p_value, 1.0);
  const std::vector<double> tie{2.0, 2.0, 1.0};
  EXPECT_EQ(placebo_rank(2.0, tie).rank, 2);
  EXPECT_THROW(placebo_rank(9.0, r), ValidationError);
}

TEST(PlaceboRank, PValueGridAndMonotone) {
  const std::vector<double> others{0.3, 1.2, 4.0, 7.5, 2.2};
  double last = 2.0;
  for (double t = 0.1; t < 10.0; t += 0.37) {
    std::vector<double> all = others;
    all.push_back(t);
    const auto r = placebo_rank(t, all);
    const double k = r.p_value * static_cast<double>(all.size());
    EXPECT_NEAR(k, std::round(k), 1e-12);
    EXPECT_GE(r.rank, 1);
    EXPECT_LE(r.rank, 6);
    EXPECT_LE(r.p_value, last);
    last = r.p_value;
  }
}

TEST(Placebo, StrongEffectRanksFirst) {
  const Panel p = strong_effect_panel(1);
  const PlaceboStudy s = placebo_in_space(p, simulation_spec(p));
  ASSERT_TRUE(s.rank.has_value());
  EXPECT_EQ(*s.rank, 1);
  EXPECT_DOUBLE_EQ(*s.p_value, 0.1);
  EXPECT_EQ(s.units_ranked, 10);
  EXPECT_TRUE(s.warnings.empty());
  for (const auto& u : s.units) EXPECT_GE(u.ratio.value, 0.0);

  const GapsPlotData g = gaps_plot_data(s);
  EXPECT_EQ(g.series.size(), 10u);
  EXPECT_EQ(std::count_if(g.series.begin(), g.series.end(), [](const auto& r) { return r.treated; }), 1);
  for (const auto& r : g.series) EXPECT_EQ(static_cast<std::size_t>(r.gaps.size()), g.years.size());
}

TEST(Placebo, TreatedLeftOutOfPlaceboPools) {
  const Panel p = strong_effect_panel(2);
  const PlaceboStudy s = placebo_in_space(p, simulation_spec(p));
  for (std::size_t i = 1; i < s.units.size(); ++i) {
    ASSERT_TRUE(s.units[i].fit);
    const auto& d = s.units[i].fit->donors;
    EXPECT_EQ(d.size(), p.donor_count() - 1);
    EXPECT_EQ(std::find(d.begin(), d.end(), p.treated_unit()), d.end());
    EXPECT_EQ(s.units[i].fit->treated, s.units[i].unit);
  }
}

TEST(Placebo, FailedFitsAreFlagged) {
  FactorModelConfig c;
  c.n_donors = 2;
  const Panel p = generate(c);
  const PlaceboStudy s = placebo_in_space(p, simulation_spec(p));
  EXPECT_EQ(s.warnings.size(), 2u);
  EXPECT_FALSE(s.units[1].ranked());
  EXPECT_EQ(s.units_ranked, 1);
  EXPECT_EQ(*s.rank, 1);
}

TEST(Placebo, CloneDonorHasInfiniteRatioAndIsNotRanked) {
  FactorModelConfig c;
  c.noise_sd = 0.0;
  c.treatment_effect = {0.5};
  const Panel p = generate(c);
  const PlaceboStudy s = placebo_in_space(p, simulation_spec(p));
  EXPECT_TRUE(s.units[0].ratio.infinite || s.units[0].fit->pre_mspe < 1e-20);
  if (s.units[0].ratio.infinite) {
    EXPECT_FALSE(s.rank.has_value());
    EXPECT_FALSE(s.warnings.empty());
  }
}

TEST(Placebo, TrimmingIsOptIn) {
  const Panel p = strong_effect_panel(3);
  PlaceboOptions o;
  const PlaceboStudy all = placebo_in_space(p, simulation_spec(p), o);
  EXPECT_EQ(all.units_ranked, 10);
  o.trim_factor = 1.0;
  const PlaceboStudy trimmed = placebo_in_space(p, simulation_spec(p), o);
  int expect = 1;
  for (std::size_t i = 1; i < all.units.size(); ++i)
    expect += all.units[i].fit->pre_mspe <= all.units[0].fit->pre_mspe ? 1 : 0;
  EXPECT_EQ(trimmed.units_ranked, expect);
}

TEST(Placebo, JobsDoNotChangeResults) {
  const Panel p = strong_effect_panel(4);
  PlaceboOptions o;
  const auto a = placebo_in_space(p, simulation_spec(p), o);
  o.jobs = 4;
  const auto b = placebo_in_space(p, simulation_spec(p), o);
  for (std::size_t i = 0; i < a.units.size(); ++i) EXPECT_EQ(a.units[i].ratio.value, b.units[i].ratio.value);
}

TEST(Quantile, Type7) {
  std::vector<double> x(1000);
  std::iota(x.begin(), x.end(), 1.0);
  std::reverse(x.begin(), x.end());
  EXPECT_DOUBLE_EQ(quantile_type7(x, 0.025), 25.975);
  EXPECT_DOUBLE_EQ(quantile_type7(x, 0.975), 975.025);
  EXPECT_DOUBLE_EQ(quantile_type7({4.0, 1.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_type7({3.0}, 0.9), 3.0);
  EXPECT_THROW(quantile_type7({}, 0.5), ValidationError);
}

TEST(Bootstrap, SameSeedBitwiseAnyJobs) {
  FactorModelConfig c;
  const Panel p = generate(c);
  BootstrapOptions o;
  o.draws = 60;
  o.seed = 7;
  const auto a = bootstrap_ci(p, simulation_spec(p), o);
  const auto b = bootstrap_ci(p, simulation_spec(p), o);
  o.jobs = 3;
  const auto d = bootstrap_ci(p, simulation_spec(p), o);
  EXPECT_EQ(a.estimates, b.estimates);
  EXPECT_EQ(a.estimates, d.estimates);
  EXPECT_EQ(a.ci_low, d.ci_low);
  EXPECT_EQ(a.ci_high, d.ci_high);
  EXPECT_LE(a.ci_low, a.ci_high);
  EXPECT_EQ(a.estimates.size(), 60u);
  o.seed = 8;
  EXPECT_NE(bootstrap_ci(p, simulation_spec(p), o).estimates, a.estimates);
}

TEST(Bootstrap, IdenticalSeriesGiveZeroInterval) {
  Eigen::MatrixXd y(6, 8);
  for (Eigen::Index t = 0; t < 8; ++t) y.col(t).setConstant(5.0 + 0.3 * static_cast<double>(t % 3));
  const Panel p = fixture::panel(y, 2010, 2014);
  BootstrapOptions o;
  o.draws = 200;
  const auto r = bootstrap_ci(p, fixture::outcome_mean_only(p), o);
  for (double e : r.estimates) EXPECT_EQ(e, 0.0);
  EXPECT_EQ(r.ci_low, 0.0);
  EXPECT_EQ(r.ci_high, 0.0);
}

TEST(Bootstrap, CiMatchesQuantilesOfEstimates) {
  FactorModelConfig c;
  c.seed = 2;
  const Panel p = generate(c);
  BootstrapOptions o;
  o.draws = 40;
  o.level = 0.9;
  const auto r = bootstrap_ci(p, simulation_spec(p), o);
  EXPECT_EQ(r.ci_low, quantile_type7(r.estimates, 0.05));
  EXPECT_EQ(r.ci_high, quantile_type7(r.estimates, 0.95));
}

TEST(Bootstrap, ReplicateReproducesDrawFromItsStream) {
  FactorModelConfig c;
  c.seed = 3;
  const Panel p = generate(c);
  const PredictorSpec spec = simulation_spec(p);
  BootstrapOptions o;
  o.draws = 5;
  o.seed = 11;
  const auto r = bootstrap_ci(p, spec, o);
  for (std::size_t b = 0; b < 5; ++b) {
    Rng gen = make_stream(11, b);
    std::vector<std::size_t> s;
    do s = draw_donor_sample(gen, p.donor_count(), static_cast<int>(p.donor_count()));
    while (std::all_of(s.begin(), s.end(), [&](auto x) { return x == s[0]; }));
    EXPECT_EQ(bootstrap_replicate(p, spec, s, p.post_range()), r.estimates[b]);
  }
}

TEST(Bootstrap, ExchangeableInDonorLabels) {
  FactorModelConfig c;
  c.seed = 6;
  c.n_donors = 5;
  c.n_pre = 10;
  const Panel p = generate(c);
  const PredictorSpec spec = fixture::outcome_lags(p);
  BootstrapOptions o;
  o.draws = 25;
  o.seed = 5;
  const auto r = bootstrap_ci(p, spec, o);

  // donor k of q is donor perm[k] of p
  const std::vector<std::size_t> perm{2, 4, 0, 3, 1};
  std::vector<std::size_t> rows{p.treated_index()};
  for (auto k : perm) rows.push_back(p.donor_indices()[k]);
  const Panel q = p.select(rows, 0);
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = k;

  std::vector<double> mine, theirs = r.estimates;
  for (int b = 0; b < o.draws; ++b) {
    Rng gen = make_stream(o.seed, static_cast<std::uint64_t>(b));
    std::vector<std::size_t> s;
    do s = draw_donor_sample(gen, p.donor_count(), 5);
    while (std::all_of(s.begin(), s.end(), [&](auto x) { return x == s[0]; }));
    for (auto& x : s) x = inv[x];
    mine.push_back(bootstrap_replicate(q, spec, s, q.post_range()));
  }
  std::sort(mine.begin(), mine.end());
  std::sort(theirs.begin(), theirs.end());
  for (std::size_t i = 0; i < mine.size(); ++i) EXPECT_NEAR(mine[i], theirs[i], 1e-8);
}

TEST(Bootstrap, Validation) {
  FactorModelConfig c;
  const Panel p = generate(c);
  BootstrapOptions o;
  o.draws = 0;
  EXPECT_THROW(bootstrap_ci(p, simulation_spec(p), o), ValidationError);
  o.draws = 2;
  o.sample_size = 1;
  EXPECT_THROW(bootstrap_ci(p, simulation_spec(p), o), ValidationError);
  o.sample_size.reset();
  o.level = 1.0;
  EXPECT_THROW(bootstrap_ci(p, simulation_spec(p), o), ValidationError);
}

TEST(Rng, StreamsAreStableAndDistinct) {
  Rng a = make_stream(1, 0), b = make_stream(1, 0), c = make_stream(1, 1);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFull);
}
