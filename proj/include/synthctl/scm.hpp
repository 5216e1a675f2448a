#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "synthctl/error.hpp"
#include "synthctl/nelder_mead.hpp"
#include "synthctl/panel.hpp"
#include "synthctl/simplex_qp.hpp"
#include "synthctl/types.hpp"

namespace synthctl {

struct ScmOptions {
  /// Uniform V plus (multistarts - 1) perturbed starts.
  int multistarts = 5;
  double perturbation_sd = 1.0;
  NelderMeadOptions outer{};
  SimplexQpOptions inner{};
};

struct ScmDiagnostics {
  int outer_evaluations = 0;
  int best_start = 0;
  std::vector<double> start_initial_mspe;
  std::vector<double> start_final_mspe;
  std::vector<bool> start_converged;
  bool converged = false;
  double inner_objective = 0.0;
  double inner_gap = 0.0;
  int inner_iterations = 0;
  /// Minimizing W is not unique (singular Hessian on the active face).
  bool nonunique_weights = false;
};

struct ScmFit {
  std::string treated;
  std::vector<std::string> donors;
  int t0 = 0;
  std::string outcome_label;
  std::vector<std::string> predictor_labels;
  WeightVector weights;
  PredictorWeights vweights;
  YearSeries observed;
  YearSeries synthetic;
  GapSeries gaps;
  double pre_mspe = 0.0;
  double post_mspe = 0.0;
  ScmDiagnostics diagnostics;
};

namespace detail {

inline SimplexQp inner_problem(const Eigen::VectorXd& x1, const Eigen::MatrixXd& x0, const PredictorWeights& v) {
  if (x0.cols() < 2) throw DomainError("synthetic control needs at least 2 donors, got " + std::to_string(x0.cols()));
  if (x0.rows() != x1.size())
    throw DomainError("predictor dimension mismatch: treated has " + std::to_string(x1.size()) + ", donors have " +
                      std::to_string(x0.rows()));
  if (v.v.size() != x1.size())
    throw DomainError("V has " + std::to_string(v.v.size()) + " entries for " + std::to_string(x1.size()) +
                      " predictors");
  if (!v.valid()) throw DomainError("predictor weights must be non-negative and sum to one");
  return SimplexQp{x0, x1, v.v, 0.0, false};
}

inline Eigen::VectorXd softmax_with_anchor(const Eigen::VectorXd& theta) {
  Eigen::VectorXd z(theta.size() + 1);
  z.head(theta.size()) = theta.cwiseMax(-30.0).cwiseMin(30.0);
  z[theta.size()] = 0.0;
  z.array() -= z.maxCoeff();
  z = z.array().exp();
  return z / z.sum();
}

}  // namespace detail

/// Donor weights minimizing (x1 - x0 w)' diag(v) (x1 - x0 w) over the simplex.
/// x0 holds one column per donor.
inline WeightVector solve_inner(const Eigen::VectorXd& x1, const Eigen::MatrixXd& x0, const PredictorWeights& v,
                                const SimplexQpOptions& opts = {}) {
  return WeightVector::clipped(solve_simplex_qp(detail::inner_problem(x1, x0, v), opts).weights);
}

/// Mean of (a_t - b_t)^2 over the window.
inline double mspe(const YearSeries& a, const YearSeries& b, const YearRange& window) {
  if (window.empty()) throw ValidationError("MSPE over an empty window");
  if (!a.covers(window) || !b.covers(window))
    throw ValidationError("series do not cover MSPE window " + to_string(window));
  double s = 0.0;
  for (int y = window.first; y <= window.last; ++y) {
    const double d = a.at(y) - b.at(y);
    s += d * d;
  }
  return s / window.size();
}

/// Observed minus synthetic, every year of the panel.
inline GapSeries gap(const Panel& p, const ScmFit& fit) {
  if (fit.treated != p.treated_unit() || fit.synthetic.years != p.periods())
    throw ValidationError("fit was not produced from this panel");
  GapSeries g;
  g.years = p.periods();
  g.values = p.treated_outcomes() - fit.synthetic.values;
  return g;
}

/// Full synthetic control fit: outer search over V (softmax-parameterized Nelder-Mead
/// with deterministic multistarts) around the inner simplex QP for W.
inline ScmFit solve_outer(const Panel& p, const PredictorSpec& spec, const ScmOptions& opts = {}) {
  if (p.pre_count() < 2)
    throw ValidationError("need at least 2 pre-treatment periods, have " + std::to_string(p.pre_count()));
  if (p.donor_count() < 2)
    throw DomainError("synthetic control needs at least 2 donors, got " + std::to_string(p.donor_count()));
  const PredictorTable table = predictor_table(p, spec);
  const Eigen::Index k = table.treated.size();
  const Eigen::Index n_pre = p.pre_count();

  const Eigen::MatrixXd y0 = p.donor_outcomes();  // periods x donors
  const Eigen::VectorXd y1 = p.treated_outcomes();
  const Eigen::VectorXd z1 = y1.head(n_pre);
  const Eigen::MatrixXd z0 = y0.topRows(n_pre);

  Eigen::VectorXd best_w;
  Eigen::VectorXd best_v;
  double best_loss = std::numeric_limits<double>::infinity();
  SimplexQpResult best_inner;
  int evaluations = 0;

  auto loss_at = [&](const Eigen::VectorXd& theta) {
    PredictorWeights v{detail::softmax_with_anchor(theta)};
    const SimplexQpResult r = solve_simplex_qp(detail::inner_problem(table.treated, table.donors, v), opts.inner);
    ++evaluations;
    const double loss = (z1 - z0 * r.weights).squaredNorm() / static_cast<double>(n_pre);
    if (loss < best_loss) {
      best_loss = loss;
      best_w = r.weights;
      best_v = v.v;
      best_inner = r;
    }
    return loss;
  };

  ScmDiagnostics diag;
  if (k == 1) {
    (void)loss_at(Eigen::VectorXd::Zero(0));
    diag.start_initial_mspe.push_back(best_loss);
    diag.start_final_mspe.push_back(best_loss);
    diag.start_converged.push_back(true);
    diag.converged = true;
  } else {
    boost::random::mt19937 gen(20150101u);
    boost::random::normal_distribution<double> normal(0.0, opts.perturbation_sd);
    std::vector<Eigen::VectorXd> starts;
    starts.emplace_back(Eigen::VectorXd::Zero(k - 1));
    for (int s = 1; s < std::max(1, opts.multistarts); ++s) {
      Eigen::VectorXd th(k - 1);
      for (Eigen::Index i = 0; i < th.size(); ++i) th[i] = normal(gen);
      starts.push_back(std::move(th));
    }
    double run_best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < starts.size(); ++s) {
      diag.start_initial_mspe.push_back(loss_at(starts[s]));
      const NelderMeadResult nm = nelder_mead(loss_at, starts[s], opts.outer);
      diag.start_final_mspe.push_back(nm.f);
      diag.start_converged.push_back(nm.converged);
      diag.converged = diag.converged || nm.converged;
      if (nm.f < run_best) {
        run_best = nm.f;
        diag.best_start = static_cast<int>(s);
      }
    }
    if (!diag.converged)
      throw ConvergenceError("V search did not converge in any of " + std::to_string(starts.size()) +
                                 " starts (best pre-MSPE " + std::to_string(best_loss) + ")",
                             best_loss, evaluations);
  }
  diag.outer_evaluations = evaluations;
  diag.inner_objective = best_inner.objective;
  diag.inner_gap = best_inner.gap;
  diag.inner_iterations = best_inner.iterations;
  diag.nonunique_weights = best_inner.degenerate;

  ScmFit fit;
  fit.treated = p.treated_unit();
  fit.donors = p.donor_names();
  fit.t0 = p.t0();
  fit.outcome_label = p.outcome_label();
  fit.predictor_labels = table.labels;
  fit.weights = WeightVector::clipped(best_w);
  fit.vweights = PredictorWeights{best_v};
  fit.observed = YearSeries{p.periods(), y1};
  fit.synthetic = YearSeries{p.periods(), y0 * fit.weights.w};
  fit.gaps = GapSeries{p.periods(), y1 - fit.synthetic.values};
  fit.pre_mspe = mspe(fit.observed, fit.synthetic, p.pre_range());
  fit.post_mspe = mspe(fit.observed, fit.synthetic, p.post_range());
  fit.diagnostics = std::move(diag);
  return fit;
}

/// Mean gap over `post`, and that mean as a percentage of `baseline_outcome`.
inline EffectEstimate average_effect(const GapSeries& g, const YearRange& post, int baseline_year,
                                     double baseline_outcome) {
  if (post.empty() || !g.covers(post)) throw ValidationError("effect window " + to_string(post) + " not covered by gaps");
  EffectEstimate e;
  e.window = post;
  e.baseline_year = baseline_year;
  e.baseline_outcome = baseline_outcome;
  double s = 0.0;
  for (int y = post.first; y <= post.last; ++y) s += g.at(y);
  e.mean_gap = s / post.size();
  e.percent_defined = baseline_outcome != 0.0 && std::isfinite(baseline_outcome);
  e.percent = e.percent_defined ? 100.0 * e.mean_gap / baseline_outcome : 0.0;
  return e;
}

/// Same, reading the baseline from the treated unit's observed outcome.
inline EffectEstimate average_effect(const Panel& p, const GapSeries& g, const YearRange& post, int baseline_year) {
  if (!post.within(p.post_range()))
    throw ValidationError("effect window " + to_string(post) + " must lie in the post-period " +
                          to_string(p.post_range()));
  if (!p.pre_range().contains(baseline_year))
    throw ValidationError("baseline year " + std::to_string(baseline_year) + " must be a pre-treatment year");
  return average_effect(g, post, baseline_year, p.outcome(p.treated_index(), baseline_year));
}

/// Convenience: effect over the whole post-period against the last pre-treatment year.
inline EffectEstimate average_effect(const Panel& p, const ScmFit& fit) {
  return average_effect(p, fit.gaps, p.post_range(), p.t0() - 1);
}

}  // namespace synthctl
