#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/uniform_int_distribution.hpp>

#include "synthctl/error.hpp"
#include "synthctl/panel.hpp"
#include "synthctl/parallel.hpp"
#include "synthctl/rng.hpp"
#include "synthctl/scm.hpp"

namespace synthctl {

/// Post-period MSPE over pre-period MSPE. A perfect pre-period fit gives an
/// infinite ratio, which is flagged rather than ranked.
struct MspeRatio {
  double value = 0.0;
  bool infinite = false;
};

inline MspeRatio mspe_ratio(const ScmFit& fit) {
  if (!(fit.pre_mspe > 0.0)) return {std::numeric_limits<double>::infinity(), true};
  return {fit.post_mspe / fit.pre_mspe, false};
}

struct PlaceboUnit {
  std::string unit;
  bool treated = false;
  std::optional<ScmFit> fit;
  MspeRatio ratio;
  /// Why the unit is not ranked: failed fit, infinite ratio, or trimmed.
  std::string exclusion;

  [[nodiscard]] bool ranked() const noexcept { return exclusion.empty(); }
};

struct PlaceboStudy {
  /// Treated unit first, then donors in panel order.
  std::vector<PlaceboUnit> units;
  double treated_ratio = 0.0;
  std::optional<int> rank;  // 1 = largest ratio
  int units_ranked = 0;
  std::optional<double> p_value;
  std::vector<std::string> warnings;
};

struct PlaceboRank {
  int rank = 0;
  double p_value = 0.0;
};

/// Rank of the treated ratio among `ratios` (which include it): the number of
/// ratios at least as large, so ties count against the treated unit.
inline PlaceboRank placebo_rank(double treated_ratio, const std::vector<double>& ratios) {
  if (ratios.empty()) throw ValidationError("no ranked units");
  const auto at_least = std::count_if(ratios.begin(), ratios.end(), [&](double r) { return r >= treated_ratio; });
  if (at_least == 0) throw ValidationError("treated ratio missing from the ranked set");
  return {static_cast<int>(at_least), static_cast<double>(at_least) / static_cast<double>(ratios.size())};
}

struct PlaceboOptions {
  ScmOptions scm{};
  int jobs = 1;
  /// Drop placebo units whose pre-MSPE exceeds this multiple of the treated unit's.
  std::optional<double> trim_factor;
};

/// Refit with every donor in turn as the pseudo-treated unit. The truly treated unit
/// is left out of each placebo donor pool.
inline PlaceboStudy placebo_in_space(const Panel& p, const PredictorSpec& spec, const PlaceboOptions& opts = {}) {
  if (p.donor_count() < 2) throw DomainError("placebo study needs at least 2 donors");
  const auto donors = p.donor_indices();
  std::vector<PlaceboUnit> units(donors.size() + 1);
  units[0].unit = p.treated_unit();
  units[0].treated = true;
  for (std::size_t d = 0; d < donors.size(); ++d) units[d + 1].unit = p.units()[donors[d]];

  parallel_for(units.size(), opts.jobs, [&](std::size_t i) {
    PlaceboUnit& u = units[i];
    try {
      if (i == 0) {
        u.fit = solve_outer(p, spec, opts.scm);
      } else {
        std::vector<std::size_t> rows{donors[i - 1]};
        for (std::size_t d = 0; d < donors.size(); ++d)
          if (d != i - 1) rows.push_back(donors[d]);
        u.fit = solve_outer(p.select(rows, 0), spec, opts.scm);
      }
      u.ratio = mspe_ratio(*u.fit);
      if (u.ratio.infinite) u.exclusion = "zero pre-period MSPE (infinite ratio)";
    } catch (const Error& e) {
      u.exclusion = std::string("fit failed: ") + e.what();
    }
  });

  PlaceboStudy study;
  if (units[0].fit && !units[0].ratio.infinite && opts.trim_factor) {
    const double cap = *opts.trim_factor * units[0].fit->pre_mspe;
    for (std::size_t i = 1; i < units.size(); ++i)
      if (units[i].ranked() && units[i].fit->pre_mspe > cap) units[i].exclusion = "trimmed: pre-MSPE above cap";
  }
  for (const auto& u : units)
    if (!u.ranked()) study.warnings.push_back(u.unit + ": " + u.exclusion);

  const PlaceboUnit& t = units[0];
  study.treated_ratio = t.ratio.value;
  std::vector<double> ranked;
  for (const auto& u : units)
    if (u.ranked()) ranked.push_back(u.ratio.value);
  study.units_ranked = static_cast<int>(ranked.size());
  if (t.ranked()) {
    const PlaceboRank r = placebo_rank(t.ratio.value, ranked);
    study.rank = r.rank;
    study.p_value = r.p_value;
  }
  study.units = std::move(units);
  return study;
}

/// Long-format gap table for overlay plots: one series per successfully fitted unit.
struct GapSeriesRow {
  std::string unit;
  bool treated = false;
  Eigen::VectorXd gaps;
};

struct GapsPlotData {
  std::vector<int> years;
  int t0 = 0;
  std::vector<GapSeriesRow> series;
};

inline GapsPlotData gaps_plot_data(const PlaceboStudy& study) {
  GapsPlotData out;
  for (const auto& u : study.units) {
    if (!u.fit) continue;
    if (out.years.empty()) {
      out.years = u.fit->gaps.years;
      out.t0 = u.fit->t0;
    }
    out.series.push_back({u.unit, u.treated, u.fit->gaps.values});
  }
  return out;
}

struct BootstrapOptions {
  int draws = 1000;
  /// Donors drawn per replicate; defaults to the donor count.
  std::optional<int> sample_size;
  double level = 0.95;
  std::uint64_t seed = 1;
  int jobs = 1;
  ScmOptions scm{};
  /// Effect window; defaults to the whole post-period.
  std::optional<YearRange> effect_window;
  int max_redraws_per_draw = 100;
};

struct BootstrapResult {
  int draws = 0;
  int sample_size = 0;
  double level = 0.95;
  std::uint64_t seed = 0;
  YearRange effect_window;
  std::vector<double> estimates;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// Replicates discarded and redrawn (degenerate pool or failed fit).
  int redraws = 0;
};

/// Sample quantile, linear interpolation between order statistics at h = (n - 1) q
/// (Hyndman-Fan type 7).
inline double quantile_type7(std::vector<double> x, double q) {
  if (x.empty()) throw ValidationError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile level outside [0, 1]");
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

/// Donor positions (0-based, into Panel::donor_indices()) for one replicate attempt.
inline std::vector<std::size_t> draw_donor_sample(Rng& gen, std::size_t donor_count, int sample_size) {
  boost::random::uniform_int_distribution<std::size_t> pick(0, donor_count - 1);
  std::vector<std::size_t> out(static_cast<std::size_t>(sample_size));
  for (auto& x : out) x = pick(gen);
  return out;
}

/// Average post-period gap of the SCM refit on the treated unit plus the given donors.
/// When all sampled donors share one outcome path every simplex weight gives that
/// path as the synthetic series, so no fit is needed (or possible: the predictors
/// have no spread).
inline double bootstrap_replicate(const Panel& p, const PredictorSpec& spec, const std::vector<std::size_t>& sample,
                                  const YearRange& window, const ScmOptions& scm = {}) {
  const auto donors = p.donor_indices();
  const auto first = static_cast<Eigen::Index>(donors.at(sample.at(0)));
  bool common_path = true;
  for (auto s : sample)
    common_path = common_path && p.outcomes().row(static_cast<Eigen::Index>(donors.at(s))) == p.outcomes().row(first);
  if (common_path) {
    const Eigen::VectorXd g = p.treated_outcomes() - p.outcomes().row(first).transpose();
    return average_effect(GapSeries{p.periods(), g}, window, p.t0() - 1, 1.0).mean_gap;
  }
  std::vector<std::size_t> rows{p.treated_index()};
  for (auto s : sample) rows.push_back(donors.at(s));
  const Panel sub = p.select(rows, 0, true);
  const ScmFit fit = solve_outer(sub, spec, scm);
  return average_effect(fit.gaps, window, p.t0() - 1, 1.0).mean_gap;
}

/// Donor-resampling bootstrap of the average effect with percentile interval.
/// Replicate b draws from its own random stream (see make_stream).
inline BootstrapResult bootstrap_ci(const Panel& p, const PredictorSpec& spec, const BootstrapOptions& opts = {}) {
  if (opts.draws < 1) throw ValidationError("bootstrap needs at least 1 draw");
  const int size = opts.sample_size.value_or(static_cast<int>(p.donor_count()));
  if (size < 2) throw ValidationError("bootstrap sample size must be >= 2");
  if (!(opts.level > 0.0 && opts.level < 1.0)) throw ValidationError("bootstrap level must be in (0, 1)");
  const YearRange window = opts.effect_window.value_or(p.post_range());
  if (!window.within(p.post_range()))
    throw ValidationError("effect window " + to_string(window) + " must lie in the post-period");

  BootstrapResult res;
  res.draws = opts.draws;
  res.sample_size = size;
  res.level = opts.level;
  res.seed = opts.seed;
  res.effect_window = window;
  res.estimates.assign(static_cast<std::size_t>(opts.draws), 0.0);
  std::vector<int> redraws(static_cast<std::size_t>(opts.draws), 0);

  parallel_for(static_cast<std::size_t>(opts.draws), opts.jobs, [&](std::size_t b) {
    Rng gen = make_stream(opts.seed, b);
    for (int attempt = 0;; ++attempt) {
      if (attempt > opts.max_redraws_per_draw)
        throw Error("bootstrap draw " + std::to_string(b) + " failed after " + std::to_string(attempt) + " attempts");
      const auto sample = draw_donor_sample(gen, p.donor_count(), size);
      const bool single_donor = std::all_of(sample.begin(), sample.end(), [&](auto s) { return s == sample[0]; });
      if (single_donor) {
        ++redraws[b];
        continue;
      }
      try {
        res.estimates[b] = bootstrap_replicate(p, spec, sample, window, opts.scm);
        return;
      } catch (const Error&) {
        ++redraws[b];
      }
    }
  });
  for (int r : redraws) res.redraws += r;
  const double alpha = 1.0 - opts.level;
  res.ci_low = quantile_type7(res.estimates, alpha / 2.0);
  res.ci_high = quantile_type7(res.estimates, 1.0 - alpha / 2.0);
  return res;
}

}  // namespace synthctl
