#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "synthctl/error.hpp"

namespace synthctl {

/// Inclusive range of calendar years.
struct YearRange {
  int first = 0;
  int last = 0;

  [[nodiscard]] constexpr bool contains(int year) const noexcept { return year >= first && year <= last; }
  [[nodiscard]] constexpr bool empty() const noexcept { return last < first; }
  [[nodiscard]] constexpr int size() const noexcept { return empty() ? 0 : last - first + 1; }
  [[nodiscard]] constexpr bool within(const YearRange& outer) const noexcept {
    return !empty() && first >= outer.first && last <= outer.last;
  }
  friend constexpr bool operator==(const YearRange&, const YearRange&) = default;
};

inline std::string to_string(const YearRange& r) {
  return std::to_string(r.first) + ":" + std::to_string(r.last);
}

/// Donor weights on the probability simplex.
struct WeightVector {
  static constexpr double kNegativeTolerance = 1e-12;
  static constexpr double kSumTolerance = 1e-9;

  Eigen::VectorXd w;

  [[nodiscard]] Eigen::Index size() const noexcept { return w.size(); }
  [[nodiscard]] double operator[](Eigen::Index i) const { return w[i]; }

  [[nodiscard]] bool on_simplex() const {
    if (w.size() == 0) return false;
    return w.minCoeff() >= -kNegativeTolerance && std::abs(w.sum() - 1.0) <= kSumTolerance;
  }

  /// Clip round-off negatives to zero and renormalize.
  static WeightVector clipped(Eigen::VectorXd raw) {
    raw = raw.cwiseMax(0.0);
    const double s = raw.sum();
    if (s > 0.0) raw /= s;
    return WeightVector{std::move(raw)};
  }
};

/// Diagonal of the predictor importance matrix V, normalized to sum to one.
struct PredictorWeights {
  Eigen::VectorXd v;

  static PredictorWeights uniform(Eigen::Index k) {
    return PredictorWeights{Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k))};
  }

  [[nodiscard]] bool valid() const {
    return v.size() > 0 && v.minCoeff() >= 0.0 && std::abs(v.sum() - 1.0) <= 1e-9;
  }
};

/// Values indexed by consecutive calendar years.
struct YearSeries {
  std::vector<int> years;
  Eigen::VectorXd values;

  [[nodiscard]] double at(int year) const {
    for (std::size_t i = 0; i < years.size(); ++i)
      if (years[i] == year) return values[static_cast<Eigen::Index>(i)];
    throw ValidationError("series has no value for year " + std::to_string(year));
  }
  [[nodiscard]] bool covers(const YearRange& r) const {
    return !years.empty() && r.within(YearRange{years.front(), years.back()});
  }
};

/// Treated-minus-synthetic difference for every year of the panel window.
using GapSeries = YearSeries;

/// Average post-treatment effect, optionally expressed relative to a baseline year.
struct EffectEstimate {
  double mean_gap = 0.0;
  YearRange window;
  int baseline_year = 0;
  double baseline_outcome = 0.0;
  bool percent_defined = false;
  double percent = 0.0;  // 100 * mean_gap / baseline_outcome

  /// Percent with one decimal, e.g. "13.4%".
  [[nodiscard]] std::string percent_text() const;
  /// Rounded to whole percent, e.g. "about 13%".
  [[nodiscard]] std::string percent_about_text() const;
};

inline std::string EffectEstimate::percent_text() const {
  if (!percent_defined) return "undefined";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f%%", percent);
  return buf;
}

inline std::string EffectEstimate::percent_about_text() const {
  if (!percent_defined) return "undefined";
  char buf[64];
  std::snprintf(buf, sizeof buf, "about %.0f%%", std::round(percent));
  return buf;
}

}  // namespace synthctl
