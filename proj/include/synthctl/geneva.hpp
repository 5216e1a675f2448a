#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "synthctl/panel.hpp"

namespace synthctl {

/// Donor weight as printed for the Geneva synthetic control.
struct CompanyWeight {
  std::string company;
  double weight;
};

/// Headline figures of the Geneva fare-reduction study. Reference values only:
/// the donor-level series behind them are not available here.
struct GenevaReference {
  double average_effect = 0.91;            // passengers per vehicle-km, 2015-2019
  double percent_effect = 13.0;            // vs. 2014
  double pre_mspe = 0.0086;
  double treated_mspe_ratio = 108.7;
  std::array<double, 2> next_ratios{9.7, 5.3};  // VBZ, Bernmobil
  double ci_low = 0.407;
  double ci_high = 1.043;
  double ascm_effect = 0.82;               // 2016-2019
  double sdid_effect = 0.87;
  double extended_pre_effect = 0.81;       // pre-period 2005-2014
  double raw_passenger_effect = 23.6;      // million trips
  double expanded_pool_effect = 0.91;
  double expanded_pool_pre_mspe = 0.0084;
};

struct GenevaDataset {
  /// TPG and the control-group mean, 2010-2019, outcome = printed metric. The
  /// `passengers` and `vkm` columns ride along as panel columns.
  Panel panel;
  SeriesPair tpg;
  SeriesPair control_mean;
  std::vector<double> tpg_metric;      // printed, one decimal
  std::vector<double> control_metric;  // printed, one decimal
  std::vector<CompanyWeight> weights;
  GenevaReference reference;
};

/// Key figures (millions) as printed, 2010 through 2019.
inline GenevaDataset geneva_dataset() {
  const std::vector<int> years{2010, 2011, 2012, 2013, 2014, 2015, 2016, 2017, 2018, 2019};
  SeriesPair tpg{years,
                 {172.1, 177.1, 192.3, 196.6, 197.1, 200.3, 213.8, 217.4, 215.4, 222.9},
                 {25.0, 25.9, 27.6, 29.1, 28.9, 28.6, 27.8, 27.9, 28.3, 29.7}};
  SeriesPair control{years,
                     {84.4, 85.3, 87.6, 88.5, 88.1, 88.5, 88.5, 89.2, 89.3, 90.4},
                     {9.8, 10.1, 10.2, 10.2, 10.3, 10.3, 10.5, 10.6, 10.9, 10.9}};
  std::vector<double> tpg_metric{6.9, 6.8, 7.0, 6.8, 6.8, 7.0, 7.7, 7.8, 7.6, 7.5};
  std::vector<double> control_metric{7.2, 7.2, 7.3, 7.4, 7.2, 7.1, 7.1, 7.1, 6.9, 7.0};
  std::vector<CompanyWeight> weights{
      {"Bernmobil (Bern)", 0.055}, {"BVB (Basel)", 0.162}, {"SBW (Winterthur)", 0.080},
      {"TL (Lausanne)", 0.079},    {"TPL (Lugano)", 0.091}, {"VB (Biel)", 0.400},
      {"VBL (Lucerne)", 0.083},    {"VBSG (St Gallen)", 0.000}, {"VBZ (Zurich)", 0.049}};

  const auto n = static_cast<Eigen::Index>(years.size());
  Eigen::MatrixXd y(2, n), pax(2, n), vkm(2, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    y(0, t) = tpg_metric[i];
    y(1, t) = control_metric[i];
    pax(0, t) = tpg.passengers[i];
    pax(1, t) = control.passengers[i];
    vkm(0, t) = tpg.vkm[i];
    vkm(1, t) = control.vkm[i];
  }
  Panel panel({"TPG", "control_mean"}, years, y, "TPG", 2015, {{"passengers", pax}, {"vkm", vkm}}, "metric");
  return GenevaDataset{std::move(panel), std::move(tpg),    std::move(control), std::move(tpg_metric),
                       std::move(control_metric), std::move(weights), GenevaReference{}};
}

}  // namespace synthctl
