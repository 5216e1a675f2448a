#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "synthctl/error.hpp"
#include "synthctl/panel.hpp"
#include "synthctl/simplex_qp.hpp"
#include "synthctl/types.hpp"

namespace synthctl {

struct SdidOptions {
  bool uniform_unit_weights = false;
  bool uniform_time_weights = false;
  std::optional<double> zeta;  // overrides the noise-based default
  SimplexQpOptions qp{};
};

struct SdidFit {
  std::vector<std::string> donors;
  std::vector<int> pre_years;
  WeightVector unit_weights;  // omega, over donors
  WeightVector time_weights;  // lambda, over pre-periods
  double unit_intercept = 0.0;
  double time_intercept = 0.0;
  double noise_level = 0.0;   // sd of donor first differences, pre-period
  double zeta = 0.0;
  double tau = 0.0;
  std::vector<std::string> notes;
};

/// Pooled sample standard deviation of donor first differences over pre-periods.
inline double donor_noise_level(const Panel& p) {
  const Eigen::MatrixXd y0 = p.donor_outcomes();  // periods x donors
  const Eigen::Index n_pre = p.pre_count();
  std::vector<double> diffs;
  for (Eigen::Index j = 0; j < y0.cols(); ++j)
    for (Eigen::Index t = 1; t < n_pre; ++t) diffs.push_back(y0(t, j) - y0(t - 1, j));
  if (diffs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(diffs.size());
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  return std::sqrt(ss / static_cast<double>(diffs.size() - 1));
}

/// Synthetic difference-in-differences for a single treated unit.
inline SdidFit sdid_estimate(const Panel& p, const SdidOptions& opts = {}) {
  const Eigen::Index n_pre = p.pre_count();
  const Eigen::Index n_post = p.post_count();
  const auto n_donors = static_cast<Eigen::Index>(p.donor_count());
  if (n_pre < 2) throw ValidationError("SDID needs at least 2 pre-treatment periods");
  if (n_donors < 2) throw DomainError("SDID needs at least 2 donors");

  const Eigen::MatrixXd y0 = p.donor_outcomes();  // periods x donors
  const Eigen::VectorXd y1 = p.treated_outcomes();
  const Eigen::MatrixXd pre0 = y0.topRows(n_pre);
  const Eigen::VectorXd donor_post_mean = y0.bottomRows(n_post).colwise().mean().transpose();

  SdidFit fit;
  fit.donors = p.donor_names();
  fit.pre_years.assign(p.periods().begin(), p.periods().begin() + n_pre);
  fit.noise_level = donor_noise_level(p);
  fit.zeta = opts.zeta.value_or(std::pow(static_cast<double>(n_post), 0.25) * fit.noise_level);
  if (fit.noise_level == 0.0 && !opts.zeta)
    fit.notes.emplace_back("donor first differences have zero variance; unit weights unregularized (zeta = 0)");

  if (opts.uniform_unit_weights) {
    fit.unit_weights.w = Eigen::VectorXd::Constant(n_donors, 1.0 / static_cast<double>(n_donors));
    fit.unit_intercept = (y1.head(n_pre) - pre0 * fit.unit_weights.w).mean();
  } else {
    SimplexQp qp{pre0, y1.head(n_pre), {}, fit.zeta * fit.zeta * static_cast<double>(n_pre), true};
    const SimplexQpResult r = solve_simplex_qp(qp, opts.qp);
    fit.unit_weights = WeightVector::clipped(r.weights);
    fit.unit_intercept = r.intercept;
    if (r.degenerate) fit.notes.emplace_back("unit weights are not unique");
  }

  if (opts.uniform_time_weights) {
    fit.time_weights.w = Eigen::VectorXd::Constant(n_pre, 1.0 / static_cast<double>(n_pre));
    fit.time_intercept = (donor_post_mean - pre0.transpose() * fit.time_weights.w).mean();
  } else {
    SimplexQp qp{pre0.transpose(), donor_post_mean, {}, 0.0, true};
    const SimplexQpResult r = solve_simplex_qp(qp, opts.qp);
    fit.time_weights = WeightVector::clipped(r.weights);
    fit.time_intercept = r.intercept;
    if (r.degenerate) fit.notes.emplace_back("time weights are not unique");
  }

  const Eigen::VectorXd& omega = fit.unit_weights.w;
  const Eigen::VectorXd& lambda = fit.time_weights.w;
  const double treated_diff = y1.tail(n_post).mean() - lambda.dot(y1.head(n_pre));
  const Eigen::VectorXd donor_diff = donor_post_mean - pre0.transpose() * lambda;
  fit.tau = treated_diff - omega.dot(donor_diff);
  return fit;
}

}  // namespace synthctl
