#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "synthctl/error.hpp"
#include "synthctl/types.hpp"

namespace synthctl {

/// A named auxiliary variable observed per unit and year. NaN marks a missing cell.
struct PredictorColumn {
  std::string name;
  Eigen::MatrixXd values;  // units x periods
};

/// Rectangular unit-by-year panel with a single treated unit.
///
/// Immutable once constructed; the constructor enforces every structural
/// invariant, so any Panel value in hand is valid.
class Panel {
 public:
  Panel(std::vector<std::string> units, std::vector<int> periods, Eigen::MatrixXd outcomes,
        std::string treated_unit, int t0, std::vector<PredictorColumn> predictors = {},
        std::string outcome_label = "outcome")
      : units_(std::move(units)),
        periods_(std::move(periods)),
        outcomes_(std::move(outcomes)),
        treated_(std::move(treated_unit)),
        t0_(t0),
        predictors_(std::move(predictors)),
        outcome_label_(std::move(outcome_label)) {
    validate();
  }

  [[nodiscard]] const std::vector<std::string>& units() const noexcept { return units_; }
  [[nodiscard]] const std::vector<int>& periods() const noexcept { return periods_; }
  [[nodiscard]] const Eigen::MatrixXd& outcomes() const noexcept { return outcomes_; }
  [[nodiscard]] const std::string& treated_unit() const noexcept { return treated_; }
  [[nodiscard]] std::size_t treated_index() const noexcept { return treated_index_; }
  [[nodiscard]] int t0() const noexcept { return t0_; }
  [[nodiscard]] const std::vector<PredictorColumn>& predictors() const noexcept { return predictors_; }
  [[nodiscard]] const std::string& outcome_label() const noexcept { return outcome_label_; }

  [[nodiscard]] std::size_t unit_count() const noexcept { return units_.size(); }
  [[nodiscard]] std::size_t period_count() const noexcept { return periods_.size(); }
  [[nodiscard]] std::size_t donor_count() const noexcept { return units_.size() - 1; }

  [[nodiscard]] YearRange window() const noexcept { return {periods_.front(), periods_.back()}; }
  [[nodiscard]] YearRange pre_range() const noexcept { return {periods_.front(), t0_ - 1}; }
  [[nodiscard]] YearRange post_range() const noexcept { return {t0_, periods_.back()}; }
  [[nodiscard]] Eigen::Index pre_count() const noexcept { return t0_ - periods_.front(); }
  [[nodiscard]] Eigen::Index post_count() const noexcept { return periods_.back() - t0_ + 1; }

  /// Donor row indices in panel order (every unit except the treated one).
  [[nodiscard]] std::vector<std::size_t> donor_indices() const {
    std::vector<std::size_t> out;
    out.reserve(donor_count());
    for (std::size_t i = 0; i < units_.size(); ++i)
      if (i != treated_index_) out.push_back(i);
    return out;
  }

  [[nodiscard]] std::vector<std::string> donor_names() const {
    std::vector<std::string> out;
    for (auto i : donor_indices()) out.push_back(units_[i]);
    return out;
  }

  [[nodiscard]] std::optional<std::size_t> find_unit(const std::string& name) const {
    auto it = std::find(units_.begin(), units_.end(), name);
    if (it == units_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - units_.begin());
  }

  [[nodiscard]] Eigen::Index period_index(int year) const {
    if (year < periods_.front() || year > periods_.back())
      throw ValidationError("year " + std::to_string(year) + " outside panel window " + to_string(window()));
    return year - periods_.front();
  }

  [[nodiscard]] double outcome(std::size_t unit, int year) const {
    return outcomes_(static_cast<Eigen::Index>(unit), period_index(year));
  }

  [[nodiscard]] Eigen::VectorXd treated_outcomes() const {
    return outcomes_.row(static_cast<Eigen::Index>(treated_index_)).transpose();
  }

  /// Donor outcomes as a periods x donors matrix (one column per donor).
  [[nodiscard]] Eigen::MatrixXd donor_outcomes() const {
    const auto donors = donor_indices();
    Eigen::MatrixXd out(outcomes_.cols(), static_cast<Eigen::Index>(donors.size()));
    for (std::size_t j = 0; j < donors.size(); ++j)
      out.col(static_cast<Eigen::Index>(j)) = outcomes_.row(static_cast<Eigen::Index>(donors[j])).transpose();
    return out;
  }

  /// New panel made of the given rows (in order; repeats allowed when `rename_repeats`),
  /// with `rows[treated_pos]` as the treated unit.
  [[nodiscard]] Panel select(const std::vector<std::size_t>& rows, std::size_t treated_pos,
                             bool rename_repeats = false) const {
    if (treated_pos >= rows.size()) throw ValidationError("treated position out of range in unit selection");
    std::vector<std::string> names;
    Eigen::MatrixXd y(static_cast<Eigen::Index>(rows.size()), outcomes_.cols());
    std::vector<PredictorColumn> preds;
    for (const auto& p : predictors_) preds.push_back({p.name, Eigen::MatrixXd(y.rows(), y.cols())});
    std::vector<int> seen(units_.size(), 0);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto r = rows[k];
      if (r >= units_.size()) throw ValidationError("unit row out of range in unit selection");
      std::string name = units_[r];
      if (seen[r]++ > 0) {
        if (!rename_repeats) throw ValidationError("unit '" + name + "' selected twice");
        name += "#" + std::to_string(seen[r]);
      }
      names.push_back(std::move(name));
      y.row(static_cast<Eigen::Index>(k)) = outcomes_.row(static_cast<Eigen::Index>(r));
      for (std::size_t c = 0; c < preds.size(); ++c)
        preds[c].values.row(static_cast<Eigen::Index>(k)) = predictors_[c].values.row(static_cast<Eigen::Index>(r));
    }
    std::string treated = names[treated_pos];
    return Panel(std::move(names), periods_, std::move(y), std::move(treated), t0_, std::move(preds), outcome_label_);
  }

  /// Same panel with a different outcome matrix (e.g. for injected effects or shifts).
  [[nodiscard]] Panel with_outcomes(Eigen::MatrixXd outcomes) const {
    return Panel(units_, periods_, std::move(outcomes), treated_, t0_, predictors_, outcome_label_);
  }

 private:
  void validate() {
    if (units_.size() < 2) throw ValidationError("panel needs the treated unit and at least one donor");
    if (periods_.empty()) throw ValidationError("panel has no periods");
    for (std::size_t i = 1; i < periods_.size(); ++i)
      if (periods_[i] != periods_[i - 1] + 1)
        throw ValidationError("periods must be consecutive increasing years (gap after " +
                              std::to_string(periods_[i - 1]) + ")");
    std::unordered_set<std::string> seen;
    for (const auto& u : units_) {
      if (u.empty()) throw ValidationError("empty unit identifier");
      if (!seen.insert(u).second) throw ValidationError("duplicate unit '" + u + "'");
    }
    auto it = std::find(units_.begin(), units_.end(), treated_);
    if (it == units_.end()) throw ValidationError("treated unit '" + treated_ + "' is not in the panel");
    treated_index_ = static_cast<std::size_t>(it - units_.begin());
    if (!(t0_ > periods_.front() && t0_ <= periods_.back()))
      throw ValidationError("t0=" + std::to_string(t0_) + " must lie in (" + std::to_string(periods_.front()) +
                            ", " + std::to_string(periods_.back()) + "]: need at least one pre and one post period");
    if (outcomes_.rows() != static_cast<Eigen::Index>(units_.size()) ||
        outcomes_.cols() != static_cast<Eigen::Index>(periods_.size()))
      throw ValidationError("outcome matrix shape does not match units x periods");
    for (Eigen::Index i = 0; i < outcomes_.rows(); ++i)
      for (Eigen::Index t = 0; t < outcomes_.cols(); ++t)
        if (!std::isfinite(outcomes_(i, t)))
          throw ValidationError("missing or non-finite outcome for unit '" + units_[static_cast<std::size_t>(i)] +
                                "' in year " + std::to_string(periods_[static_cast<std::size_t>(t)]));
    std::unordered_set<std::string> pnames;
    for (const auto& p : predictors_) {
      if (!pnames.insert(p.name).second) throw ValidationError("duplicate predictor column '" + p.name + "'");
      if (p.values.rows() != outcomes_.rows() || p.values.cols() != outcomes_.cols())
        throw ValidationError("predictor '" + p.name + "' shape does not match units x periods");
    }
  }

  std::vector<std::string> units_;
  std::vector<int> periods_;
  Eigen::MatrixXd outcomes_;
  std::string treated_;
  int t0_;
  std::vector<PredictorColumn> predictors_;
  std::string outcome_label_;
  std::size_t treated_index_ = 0;
};

/// Yearly passenger trips and vehicle kilometres of one operator (millions).
struct SeriesPair {
  std::vector<int> years;
  std::vector<double> passengers;
  std::vector<double> vkm;
};

/// Passengers per vehicle-km, year by year.
inline std::vector<double> ratio_metric(const SeriesPair& s) {
  if (s.passengers.size() != s.years.size() || s.vkm.size() != s.years.size())
    throw ValidationError("series pair: passengers, vkm and years must have equal length");
  std::vector<double> out(s.years.size());
  for (std::size_t i = 0; i < s.years.size(); ++i) {
    if (!(s.vkm[i] > 0.0))
      throw DomainError("vehicle kilometres must be positive (year " + std::to_string(s.years[i]) + ")");
    if (!(s.passengers[i] >= 0.0))
      throw DomainError("passenger trips must be non-negative (year " + std::to_string(s.years[i]) + ")");
    out[i] = s.passengers[i] / s.vkm[i];
  }
  return out;
}

/// Truncate a panel to the inclusive year window [start, end].
inline Panel restrict_window(const Panel& p, int start, int end) {
  if (start > end) throw ValidationError("window start " + std::to_string(start) + " after end " + std::to_string(end));
  const YearRange w{start, end};
  if (!w.within(p.window()))
    throw ValidationError("window " + to_string(w) + " not inside panel periods " + to_string(p.window()));
  if (!(p.t0() > start && p.t0() <= end))
    throw ValidationError("window " + to_string(w) + " must keep at least one pre-period and one post-period (t0=" +
                          std::to_string(p.t0()) + ")");
  const Eigen::Index c0 = p.period_index(start);
  const Eigen::Index n = end - start + 1;
  std::vector<int> years(static_cast<std::size_t>(n));
  std::iota(years.begin(), years.end(), start);
  std::vector<PredictorColumn> preds;
  for (const auto& col : p.predictors()) preds.push_back({col.name, col.values.middleCols(c0, n)});
  return Panel(p.units(), std::move(years), p.outcomes().middleCols(c0, n), p.treated_unit(), p.t0(),
               std::move(preds), p.outcome_label());
}

/// What the synthetic control is matched on.
struct PredictorSpec {
  /// Predictor columns of the panel, each averaged over `predictor_window`.
  std::vector<std::string> names;
  /// Mean outcome over this pre-treatment window is appended as a predictor.
  std::optional<YearRange> outcome_avg_window;
  /// Individual pre-treatment outcome years appended as predictors.
  std::vector<int> outcome_years;
  /// Averaging window for named predictors; defaults to the whole pre-period.
  std::optional<YearRange> predictor_window;

  [[nodiscard]] std::size_t size() const noexcept {
    return names.size() + (outcome_avg_window ? 1 : 0) + outcome_years.size();
  }
};

/// Matching predictors for treated (X1) and donors (X0), standardized across units.
struct PredictorTable {
  std::vector<std::string> labels;
  Eigen::VectorXd treated;      // K
  Eigen::MatrixXd donors;       // K x J, one column per donor
  Eigen::VectorXd raw_treated;  // before standardization
  Eigen::MatrixXd raw_donors;
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
};

/// Build X1/X0. Each predictor is standardized to mean 0 and (population) variance 1
/// across the treated unit and all donors.
inline PredictorTable predictor_table(const Panel& p, const PredictorSpec& spec) {
  if (spec.size() == 0) throw ValidationError("empty predictor set");
  const YearRange pre = p.pre_range();
  const YearRange pwin = spec.predictor_window.value_or(pre);
  if (!pwin.within(pre))
    throw ValidationError("predictor window " + to_string(pwin) + " must lie inside pre-period " + to_string(pre));

  const auto n_units = static_cast<Eigen::Index>(p.unit_count());
  const auto k = static_cast<Eigen::Index>(spec.size());
  Eigen::MatrixXd all(k, n_units);  // predictors x units, panel order
  std::vector<std::string> labels;
  Eigen::Index row = 0;

  for (const auto& name : spec.names) {
    auto it = std::find_if(p.predictors().begin(), p.predictors().end(),
                           [&](const PredictorColumn& c) { return c.name == name; });
    if (it == p.predictors().end()) throw ValidationError("predictor column '" + name + "' not in panel");
    const Eigen::Index c0 = p.period_index(pwin.first);
    for (Eigen::Index u = 0; u < n_units; ++u) {
      double sum = 0.0;
      int count = 0;
      for (Eigen::Index t = c0; t < c0 + pwin.size(); ++t) {
        const double x = it->values(u, t);
        if (std::isfinite(x)) {
          sum += x;
          ++count;
        }
      }
      if (count == 0)
        throw ValidationError("predictor '" + name + "' has no value for unit '" +
                              p.units()[static_cast<std::size_t>(u)] + "' in " + to_string(pwin));
      all(row, u) = sum / count;
    }
    labels.push_back(name);
    ++row;
  }
  if (spec.outcome_avg_window) {
    const YearRange w = *spec.outcome_avg_window;
    if (!w.within(pre))
      throw ValidationError("outcome averaging window " + to_string(w) + " must lie inside pre-period " +
                            to_string(pre));
    all.row(row) = p.outcomes().middleCols(p.period_index(w.first), w.size()).rowwise().mean().transpose();
    labels.push_back("outcome_mean_" + to_string(w));
    ++row;
  }
  for (int year : spec.outcome_years) {
    if (!pre.contains(year))
      throw ValidationError("outcome predictor year " + std::to_string(year) + " not in pre-period " + to_string(pre));
    all.row(row) = p.outcomes().col(p.period_index(year)).transpose();
    labels.push_back("outcome_" + std::to_string(year));
    ++row;
  }

  PredictorTable out;
  out.labels = std::move(labels);
  out.center = all.rowwise().mean();
  Eigen::MatrixXd centered = all.colwise() - out.center;
  out.scale = (centered.array().square().rowwise().sum() / static_cast<double>(n_units)).sqrt();
  for (Eigen::Index r = 0; r < k; ++r) {
    const double spread = centered.row(r).cwiseAbs().maxCoeff();
    const double magnitude = std::max(1.0, all.row(r).cwiseAbs().maxCoeff());
    if (!(out.scale[r] > 0.0) || spread <= 1e-13 * magnitude)
      throw ValidationError("predictor '" + out.labels[static_cast<std::size_t>(r)] +
                            "' has zero variance across units");
  }
  Eigen::MatrixXd standardized = centered.array().colwise() / out.scale.array();

  const auto donors = p.donor_indices();
  const auto ti = static_cast<Eigen::Index>(p.treated_index());
  out.treated = standardized.col(ti);
  out.raw_treated = all.col(ti);
  out.donors.resize(k, static_cast<Eigen::Index>(donors.size()));
  out.raw_donors.resize(k, static_cast<Eigen::Index>(donors.size()));
  for (std::size_t j = 0; j < donors.size(); ++j) {
    out.donors.col(static_cast<Eigen::Index>(j)) = standardized.col(static_cast<Eigen::Index>(donors[j]));
    out.raw_donors.col(static_cast<Eigen::Index>(j)) = all.col(static_cast<Eigen::Index>(donors[j]));
  }
  return out;
}

}  // namespace synthctl
