#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "synthctl/error.hpp"
#include "synthctl/panel.hpp"
#include "synthctl/rng.hpp"

namespace synthctl {

/// Interactive fixed-effects simulator:
///
///   Y_it = base_level + a_i + d_t + sum_k L_ik F_tk + e_it,  e_it ~ N(0, noise_sd^2)
///
/// The treated unit's (a, L) is a convex combination of the donors', so a perfect
/// synthetic control exists when noise_sd = 0.
struct FactorModelConfig {
  int n_donors = 9;
  int n_pre = 5;
  int n_post = 5;
  int n_factors = 2;
  double factor_scale = 1.0;
  double loading_scale = 1.0;
  double noise_sd = 0.1;
  /// One value for every post year, or one value per post year.
  std::vector<double> treatment_effect{0.9};
  /// Weights over donors; nullopt draws a random interior point (flat Dirichlet).
  std::optional<std::vector<double>> treated_loading_mix;
  double base_level = 7.0;
  int first_year = 2010;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_donors < 2) throw ValidationError("simulator: n_donors must be >= 2");
    if (n_pre < 2) throw ValidationError("simulator: n_pre must be >= 2");
    if (n_post < 1) throw ValidationError("simulator: n_post must be >= 1");
    if (n_factors < 0) throw ValidationError("simulator: n_factors must be >= 0");
    if (!(factor_scale >= 0.0) || !(loading_scale >= 0.0) || !(noise_sd >= 0.0))
      throw ValidationError("simulator: scales and noise_sd must be >= 0");
    if (treatment_effect.size() != 1 && treatment_effect.size() != static_cast<std::size_t>(n_post))
      throw ValidationError("simulator: treatment_effect needs 1 or n_post values");
    if (treated_loading_mix) {
      const auto& m = *treated_loading_mix;
      if (m.size() != static_cast<std::size_t>(n_donors))
        throw ValidationError("simulator: treated_loading_mix needs n_donors entries");
      double s = 0.0;
      for (double x : m) {
        if (x < 0.0) throw ValidationError("simulator: treated_loading_mix must be non-negative");
        s += x;
      }
      if (std::abs(s - 1.0) > 1e-9) throw ValidationError("simulator: treated_loading_mix must sum to 1");
    }
  }
};

struct SimulatedPanel {
  Panel panel;
  Eigen::VectorXd mix;            // true donor weights of the treated unit
  Eigen::VectorXd true_effect;    // per post year
  Eigen::MatrixXd untreated;      // outcomes without the injected effect
  Eigen::MatrixXd vkm;            // supply series, units x periods
  Eigen::MatrixXd passengers;     // outcome * vkm
};

inline std::string donor_label(int j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "donor%02d", j + 1);
  return buf;
}

inline SimulatedPanel generate_detailed(const FactorModelConfig& cfg) {
  cfg.validate();
  Rng gen(splitmix64(cfg.seed));
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  boost::random::exponential_distribution<double> expo(1.0);

  const int j = cfg.n_donors;
  const int t = cfg.n_pre + cfg.n_post;
  const int f = cfg.n_factors;
  // Row 0..j-1 donors, row j treated.
  Eigen::VectorXd unit_effect(j + 1);
  Eigen::MatrixXd loading(j + 1, f);
  for (int i = 0; i < j; ++i) {
    unit_effect[i] = cfg.loading_scale * normal(gen);
    for (int k = 0; k < f; ++k) loading(i, k) = cfg.loading_scale * normal(gen);
  }
  Eigen::VectorXd mix(j);
  if (cfg.treated_loading_mix) {
    for (int i = 0; i < j; ++i) mix[i] = (*cfg.treated_loading_mix)[static_cast<std::size_t>(i)];
  } else {
    for (int i = 0; i < j; ++i) mix[i] = expo(gen);
    mix /= mix.sum();
  }
  unit_effect[j] = mix.dot(unit_effect.head(j));
  loading.row(j) = mix.transpose() * loading.topRows(j);

  Eigen::VectorXd time_effect(t);
  Eigen::MatrixXd factor(t, f);
  double walk = 0.0;
  for (int s = 0; s < t; ++s) {
    walk += 0.2 * cfg.factor_scale * normal(gen);
    time_effect[s] = walk;
    for (int k = 0; k < f; ++k) factor(s, k) = 0.5 * cfg.factor_scale * normal(gen);
  }

  Eigen::MatrixXd y(j + 1, t);
  for (int i = 0; i <= j; ++i)
    for (int s = 0; s < t; ++s)
      y(i, s) = cfg.base_level + unit_effect[i] + time_effect[s] + loading.row(i).dot(factor.row(s));
  if (cfg.noise_sd > 0.0)
    for (int i = 0; i <= j; ++i)
      for (int s = 0; s < t; ++s) y(i, s) += cfg.noise_sd * normal(gen);

  Eigen::MatrixXd vkm(j + 1, t);
  for (int i = 0; i <= j; ++i) {
    const double level = 15.0 * std::exp(0.5 * normal(gen));
    for (int s = 0; s < t; ++s) vkm(i, s) = level * std::pow(1.02, s);
  }

  Eigen::VectorXd effect(cfg.n_post);
  for (int s = 0; s < cfg.n_post; ++s)
    effect[s] = cfg.treatment_effect.size() == 1 ? cfg.treatment_effect[0]
                                                 : cfg.treatment_effect[static_cast<std::size_t>(s)];
  Eigen::MatrixXd untreated = y;
  for (int s = 0; s < cfg.n_post; ++s) y(j, cfg.n_pre + s) += effect[s];

  std::vector<std::string> units;
  for (int i = 0; i < j; ++i) units.push_back(donor_label(i));
  units.emplace_back("treated");
  std::vector<int> years;
  for (int s = 0; s < t; ++s) years.push_back(cfg.first_year + s);
  std::vector<PredictorColumn> preds;
  preds.push_back({"unit_effect", unit_effect.replicate(1, t)});
  for (int k = 0; k < f; ++k) preds.push_back({"loading" + std::to_string(k + 1), loading.col(k).replicate(1, t)});

  Eigen::MatrixXd passengers = y.cwiseProduct(vkm);
  Panel panel(std::move(units), std::move(years), y, "treated", cfg.first_year + cfg.n_pre, std::move(preds),
              "outcome");
  return SimulatedPanel{std::move(panel), std::move(mix), std::move(effect), std::move(untreated), std::move(vkm),
                        std::move(passengers)};
}

/// Simulated panel; deterministic in cfg.seed.
inline Panel generate(const FactorModelConfig& cfg) { return generate_detailed(cfg).panel; }

/// Predictor spec used for simulated panels: every predictor column plus the
/// pre-period outcome mean.
inline PredictorSpec simulation_spec(const Panel& p) {
  PredictorSpec spec;
  for (const auto& c : p.predictors()) spec.names.push_back(c.name);
  spec.outcome_avg_window = p.pre_range();
  return spec;
}

}  // namespace synthctl
