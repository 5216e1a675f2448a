#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "synthctl/error.hpp"
#include "synthctl/panel.hpp"
#include "synthctl/scm.hpp"

namespace synthctl {

struct AugmentedOptions {
  /// Ridge penalty; nullopt selects it by leave-one-donor-out cross-validation.
  std::optional<double> lambda;
  int grid_points = 30;
  double grid_low = 1e-6;
  double grid_high = 1e6;
  /// Effect window; defaults to the whole post-period.
  std::optional<YearRange> effect_window;
  ScmOptions scm{};
};

struct AugmentedFit {
  ScmFit base;
  double lambda = 0.0;
  bool lambda_auto = false;
  /// One column of ridge coefficients per post year (pre-periods x post-periods).
  Eigen::MatrixXd ridge_coefficients;
  /// Pre-period outcome imbalance, treated minus weighted donors.
  Eigen::VectorXd imbalance;
  YearSeries corrected_synthetic;  // post years only
  Eigen::VectorXd correction;      // per post year
  YearRange effect_window;
  double base_effect = 0.0;
  double corrected_effect = 0.0;
  std::vector<double> lambda_grid;
  std::vector<double> cv_error;
};

/// (Z'Z + lambda I)^-1 Z'Y with Z donors x features and Y donors x targets.
inline Eigen::MatrixXd ridge_coefficients(const Eigen::MatrixXd& z, const Eigen::MatrixXd& y, double lambda) {
  if (z.rows() != y.rows()) throw DomainError("ridge: feature and target row counts differ");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("ridge: penalty must be finite and >= 0");
  Eigen::MatrixXd gram = z.transpose() * z;
  if (lambda == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
      throw DomainError("ridge: design is singular with lambda = 0; use a positive penalty");
    return lu.solve(z.transpose() * y);
  }
  gram.diagonal().array() += lambda;
  return gram.ldlt().solve(z.transpose() * y);
}

/// Penalty grid: log-spaced between grid_low and grid_high times mean diag(Z'Z).
inline std::vector<double> ridge_lambda_grid(const Eigen::MatrixXd& z, const AugmentedOptions& opts) {
  const double scale = z.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, z.cols()));
  const double base = scale > 0.0 ? scale : 1.0;
  std::vector<double> grid;
  const int n = std::max(2, opts.grid_points);
  const double lo = std::log10(opts.grid_low), hi = std::log10(opts.grid_high);
  for (int g = 0; g < n; ++g) grid.push_back(base * std::pow(10.0, lo + (hi - lo) * g / (n - 1)));
  return grid;
}

/// Leave-one-donor-out squared prediction error of the ridge outcome model.
inline double ridge_loo_error(const Eigen::MatrixXd& z, const Eigen::MatrixXd& y, double lambda) {
  const Eigen::Index n = z.rows();
  double sse = 0.0;
  for (Eigen::Index out = 0; out < n; ++out) {
    Eigen::MatrixXd zk(n - 1, z.cols()), yk(n - 1, y.cols());
    for (Eigen::Index i = 0, r = 0; i < n; ++i) {
      if (i == out) continue;
      zk.row(r) = z.row(i);
      yk.row(r) = y.row(i);
      ++r;
    }
    const Eigen::MatrixXd eta = ridge_coefficients(zk, yk, lambda);
    sse += (y.row(out) - z.row(out) * eta).squaredNorm();
  }
  return sse;
}

/// Ridge-corrected synthetic control around an existing base fit.
inline AugmentedFit ridge_augment(const Panel& p, const ScmFit& base, const AugmentedOptions& opts = {}) {
  if (p.pre_count() < 2) throw ValidationError("augmented SCM needs at least 2 pre-treatment periods");
  const Eigen::Index n_pre = p.pre_count();
  const Eigen::Index n_post = p.post_count();
  const Eigen::MatrixXd y0 = p.donor_outcomes().transpose();  // donors x periods
  const Eigen::VectorXd y1 = p.treated_outcomes();
  const Eigen::MatrixXd z0 = y0.leftCols(n_pre);
  const Eigen::MatrixXd post0 = y0.rightCols(n_post);
  const Eigen::VectorXd z1 = y1.head(n_pre);
  const Eigen::VectorXd& w = base.weights.w;
  if (w.size() != z0.rows()) throw ValidationError("base fit does not match the panel's donors");

  AugmentedFit out;
  out.base = base;
  if (opts.lambda) {
    out.lambda = *opts.lambda;
  } else {
    if (z0.rows() < 3) throw ValidationError("cross-validated lambda needs at least 3 donors");
    out.lambda_auto = true;
    out.lambda_grid = ridge_lambda_grid(z0, opts);
    double best = std::numeric_limits<double>::infinity();
    for (double lam : out.lambda_grid) {
      const double e = ridge_loo_error(z0, post0, lam);
      out.cv_error.push_back(e);
      if (e < best) {
        best = e;
        out.lambda = lam;
      }
    }
  }
  out.ridge_coefficients = ridge_coefficients(z0, post0, out.lambda);
  out.imbalance = z1 - z0.transpose() * w;
  out.correction = out.ridge_coefficients.transpose() * out.imbalance;
  const Eigen::VectorXd synth_post = post0.transpose() * w;
  out.corrected_synthetic.years.assign(p.periods().end() - n_post, p.periods().end());
  out.corrected_synthetic.values = synth_post + out.correction;

  out.effect_window = opts.effect_window.value_or(p.post_range());
  if (!out.effect_window.within(p.post_range()))
    throw ValidationError("effect window " + to_string(out.effect_window) + " must lie in the post-period");
  double base_sum = 0.0, corrected_sum = 0.0;
  for (int year = out.effect_window.first; year <= out.effect_window.last; ++year) {
    const Eigen::Index t = year - p.t0();
    const double observed = y1[n_pre + t];
    base_sum += observed - synth_post[t];
    corrected_sum += observed - out.corrected_synthetic.values[t];
  }
  out.base_effect = base_sum / out.effect_window.size();
  out.corrected_effect = corrected_sum / out.effect_window.size();
  return out;
}

/// Fit the synthetic control, then bias-correct it with a ridge outcome model on
/// pre-period outcomes (one regression per post year).
inline AugmentedFit ridge_ascm(const Panel& p, const PredictorSpec& spec, const AugmentedOptions& opts = {}) {
  return ridge_augment(p, solve_outer(p, spec, opts.scm), opts);
}

}  // namespace synthctl
