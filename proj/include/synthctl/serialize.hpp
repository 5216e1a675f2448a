#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthctl/augmented.hpp"
#include "synthctl/csv.hpp"
#include "synthctl/inference.hpp"
#include "synthctl/scm.hpp"
#include "synthctl/sdid.hpp"

// JSON and CSV artifact schemas. Field names here are the stable contract
// consumed by `synthctl report`.

namespace synthctl {

using Json = nlohmann::ordered_json;

inline Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const EffectEstimate& e) {
  Json j;
  j["mean_gap"] = e.mean_gap;
  j["window"] = {e.window.first, e.window.last};
  j["baseline_year"] = e.baseline_year;
  j["baseline_outcome"] = e.baseline_outcome;
  j["percent_defined"] = e.percent_defined;
  j["percent"] = e.percent_defined ? Json(e.percent) : Json(nullptr);
  j["percent_text"] = e.percent_text();
  return j;
}

inline Json to_json(const ScmFit& f) {
  Json j;
  j["treated"] = f.treated;
  j["t0"] = f.t0;
  j["outcome_label"] = f.outcome_label;
  Json w = Json::array();
  for (std::size_t i = 0; i < f.donors.size(); ++i)
    w.push_back({{"donor", f.donors[i]}, {"weight", f.weights.w[static_cast<Eigen::Index>(i)]}});
  j["weights"] = w;
  Json v = Json::array();
  for (std::size_t i = 0; i < f.predictor_labels.size(); ++i)
    v.push_back({{"predictor", f.predictor_labels[i]}, {"weight", f.vweights.v[static_cast<Eigen::Index>(i)]}});
  j["vweights"] = v;
  Json series = Json::array();
  for (std::size_t t = 0; t < f.observed.years.size(); ++t) {
    const auto i = static_cast<Eigen::Index>(t);
    series.push_back({{"year", f.observed.years[t]},
                      {"observed", f.observed.values[i]},
                      {"synthetic", f.synthetic.values[i]},
                      {"gap", f.gaps.values[i]}});
  }
  j["series"] = series;
  j["pre_mspe"] = f.pre_mspe;
  j["post_mspe"] = f.post_mspe;
  const auto& d = f.diagnostics;
  j["diagnostics"] = {{"outer_evaluations", d.outer_evaluations},
                      {"best_start", d.best_start},
                      {"start_initial_mspe", d.start_initial_mspe},
                      {"start_final_mspe", d.start_final_mspe},
                      {"converged", d.converged},
                      {"inner_objective", d.inner_objective},
                      {"inner_gap", d.inner_gap},
                      {"inner_iterations", d.inner_iterations},
                      {"nonunique_weights", d.nonunique_weights}};
  return j;
}

inline Json to_json(const AugmentedFit& a) {
  Json j;
  j["lambda"] = a.lambda;
  j["lambda_auto"] = a.lambda_auto;
  j["lambda_grid"] = a.lambda_grid;
  j["cv_error"] = a.cv_error;
  j["imbalance"] = vector_json(a.imbalance);
  Json per_year = Json::array();
  for (std::size_t t = 0; t < a.corrected_synthetic.years.size(); ++t) {
    const auto i = static_cast<Eigen::Index>(t);
    per_year.push_back({{"year", a.corrected_synthetic.years[t]},
                        {"corrected_synthetic", a.corrected_synthetic.values[i]},
                        {"correction", a.correction[i]},
                        {"ridge_coefficients", vector_json(a.ridge_coefficients.col(i))}});
  }
  j["post_years"] = per_year;
  j["effect_window"] = {a.effect_window.first, a.effect_window.last};
  j["base_effect"] = a.base_effect;
  j["corrected_effect"] = a.corrected_effect;
  return j;
}

inline Json to_json(const SdidFit& s) {
  Json j;
  Json omega = Json::array();
  for (std::size_t i = 0; i < s.donors.size(); ++i)
    omega.push_back({{"donor", s.donors[i]}, {"weight", s.unit_weights.w[static_cast<Eigen::Index>(i)]}});
  j["unit_weights"] = omega;
  Json lambda = Json::array();
  for (std::size_t t = 0; t < s.pre_years.size(); ++t)
    lambda.push_back({{"year", s.pre_years[t]}, {"weight", s.time_weights.w[static_cast<Eigen::Index>(t)]}});
  j["time_weights"] = lambda;
  j["unit_intercept"] = s.unit_intercept;
  j["time_intercept"] = s.time_intercept;
  j["noise_level"] = s.noise_level;
  j["zeta"] = s.zeta;
  j["tau"] = s.tau;
  j["notes"] = s.notes;
  return j;
}

inline Json to_json(const PlaceboStudy& s) {
  Json j;
  Json units = Json::array();
  for (const auto& u : s.units) {
    Json x;
    x["unit"] = u.unit;
    x["treated"] = u.treated;
    x["ratio"] = finite_or_null(u.ratio.value);
    x["ratio_infinite"] = u.ratio.infinite;
    x["pre_mspe"] = u.fit ? Json(u.fit->pre_mspe) : Json(nullptr);
    x["post_mspe"] = u.fit ? Json(u.fit->post_mspe) : Json(nullptr);
    x["ranked"] = u.ranked();
    x["exclusion"] = u.exclusion;
    units.push_back(std::move(x));
  }
  j["units"] = units;
  j["treated_ratio"] = finite_or_null(s.treated_ratio);
  j["rank"] = s.rank ? Json(*s.rank) : Json(nullptr);
  j["units_ranked"] = s.units_ranked;
  j["p_value"] = s.p_value ? Json(*s.p_value) : Json(nullptr);
  j["warnings"] = s.warnings;
  return j;
}

inline Json to_json(const BootstrapResult& b) {
  Json j;
  j["draws"] = b.draws;
  j["sample_size"] = b.sample_size;
  j["level"] = b.level;
  j["seed"] = b.seed;
  j["effect_window"] = {b.effect_window.first, b.effect_window.last};
  j["quantile_rule"] = "type7";
  j["ci_low"] = b.ci_low;
  j["ci_high"] = b.ci_high;
  double mean = 0.0;
  for (double e : b.estimates) mean += e;
  j["mean_estimate"] = b.estimates.empty() ? 0.0 : mean / static_cast<double>(b.estimates.size());
  j["redraws"] = b.redraws;
  return j;
}

/// year,observed,synthetic,gap
inline void write_gaps_csv(std::ostream& out, const ScmFit& f) {
  out << "year,observed,synthetic,gap\n";
  for (std::size_t t = 0; t < f.observed.years.size(); ++t) {
    const auto i = static_cast<Eigen::Index>(t);
    out << f.observed.years[t] << ',' << detail::format_number(f.observed.values[i]) << ','
        << detail::format_number(f.synthetic.values[i]) << ',' << detail::format_number(f.gaps.values[i]) << '\n';
  }
}

/// unit,treated,year,gap (long format, one series per unit)
inline void write_gaps_table_csv(std::ostream& out, const GapsPlotData& g) {
  out << "unit,treated,year,gap\n";
  for (const auto& s : g.series)
    for (std::size_t t = 0; t < g.years.size(); ++t)
      out << s.unit << ',' << (s.treated ? 1 : 0) << ',' << g.years[t] << ','
          << detail::format_number(s.gaps[static_cast<Eigen::Index>(t)]) << '\n';
}

/// unit,treated,pre_mspe,post_mspe,ratio,ranked,exclusion
inline void write_ratio_table_csv(std::ostream& out, const PlaceboStudy& s) {
  out << "unit,treated,pre_mspe,post_mspe,ratio,ranked,exclusion\n";
  for (const auto& u : s.units) {
    out << u.unit << ',' << (u.treated ? 1 : 0) << ',';
    if (u.fit)
      out << detail::format_number(u.fit->pre_mspe) << ',' << detail::format_number(u.fit->post_mspe) << ',';
    else
      out << ",,";
    out << (u.ratio.infinite ? std::string("inf") : (u.fit ? detail::format_number(u.ratio.value) : std::string()))
        << ',' << (u.ranked() ? 1 : 0) << ",\"" << u.exclusion << "\"\n";
  }
}

}  // namespace synthctl
