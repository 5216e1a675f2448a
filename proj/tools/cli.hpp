#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "synthctl/synthctl.hpp"

namespace synthctl::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

/// Everything a run needs, from flags and/or a key=value config file.
struct RunConfig {
  std::string command;
  std::string panel;
  std::string builtin;
  std::string treated;
  std::optional<int> t0;
  std::string window;  // "A:B"
  std::string outcome = "ratio";  // ratio | raw
  std::string outcome_column = "outcome";
  std::string passengers_column = "passengers";
  std::string vkm_column = "vkm";
  std::vector<std::string> predictors;
  std::string outcome_mean_window;  // "A:B", default whole pre-period
  bool no_outcome_mean = false;
  std::string method = "scm";  // scm | ascm | sdid
  std::optional<double> lambda;
  std::string effect_window;
  std::optional<int> baseline_year;
  int draws = 1000;
  std::optional<int> sample_size;
  double level = 0.95;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::optional<double> trim;
  double display_cap = 1.5;
  bool no_display_cap = false;
  std::string out = "synthctl_out";
  // simulate
  FactorModelConfig sim{};
  double sim_effect = 0.9;
};

/// Raised for CLI-level usage problems (exit code 2).
class UsageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
  [[nodiscard]] const char* kind() const noexcept override { return "usage"; }
};

inline YearRange parse_range(const std::string& s, const std::string& what) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(s);
    std::size_t a = 0, b = 0;
    const int first = std::stoi(s.substr(0, colon), &a);
    const int last = std::stoi(s.substr(colon + 1), &b);
    if (a != colon || b != s.size() - colon - 1) throw std::invalid_argument(s);
    if (last < first) throw UsageError(what + " '" + s + "' has end before start");
    return {first, last};
  } catch (const std::logic_error&) {
    throw UsageError(what + " must look like A:B, got '" + s + "'");
  }
}

inline std::vector<std::string> csv_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open panel file '" + path + "'");
  std::string line;
  while (std::getline(in, line))
    if (!synthctl::detail::trim(line).empty()) return synthctl::detail::split_csv_line(line);
  throw ValidationError("panel CSV is empty");
}

/// Panel per config: builtin or CSV, outcome mode, window.
inline Panel load_configured_panel(const RunConfig& cfg) {
  std::optional<YearRange> window;
  if (!cfg.window.empty()) window = parse_range(cfg.window, "--window");
  if (cfg.outcome != "ratio" && cfg.outcome != "raw") throw UsageError("--outcome must be ratio or raw");

  if (!cfg.builtin.empty()) {
    if (cfg.builtin != "geneva") throw UsageError("unknown builtin dataset '" + cfg.builtin + "'");
    if (!cfg.panel.empty()) throw UsageError("--panel and --builtin are mutually exclusive");
    const GenevaDataset g = geneva_dataset();
    Panel p = g.panel;
    if (cfg.outcome == "raw") {
      const auto& pax = p.predictors()[0].values;
      p = Panel(p.units(), p.periods(), pax, p.treated_unit(), p.t0(), {}, "passengers");
    }
    const std::string treated = cfg.treated.empty() ? p.treated_unit() : cfg.treated;
    const int t0 = cfg.t0.value_or(p.t0());
    p = Panel(p.units(), p.periods(), p.outcomes(), treated, t0, p.predictors(), p.outcome_label());
    if (window) p = restrict_window(p, window->first, window->last);
    return p;
  }

  if (cfg.panel.empty()) throw UsageError("one of --panel or --builtin is required");
  if (cfg.treated.empty()) throw UsageError("--treated is required with --panel");
  if (!cfg.t0) throw UsageError("--t0 is required with --panel");
  const auto header = csv_header(cfg.panel);
  auto has = [&](const std::string& c) { return std::find(header.begin(), header.end(), c) != header.end(); };
  PanelSchema schema;
  schema.treated = cfg.treated;
  schema.t0 = *cfg.t0;
  schema.window = window;
  if (cfg.outcome == "raw") {
    schema.outcome_column = cfg.passengers_column;
  } else if (has(cfg.passengers_column) && has(cfg.vkm_column)) {
    schema.outcome_ratio = std::make_pair(cfg.passengers_column, cfg.vkm_column);
  } else {
    schema.outcome_column = cfg.outcome_column;
  }
  std::vector<std::string> preds;
  for (const auto& h : header)
    if (h != "unit" && h != "year" && h != cfg.outcome_column && h != cfg.passengers_column && h != cfg.vkm_column)
      preds.push_back(h);
  schema.predictor_columns = preds;
  return load_panel(cfg.panel, schema);
}

inline PredictorSpec configured_spec(const RunConfig& cfg, const Panel& p) {
  PredictorSpec spec;
  if (!cfg.predictors.empty()) {
    spec.names = cfg.predictors;
  } else {
    for (const auto& c : p.predictors())
      if (c.name != "passengers" && c.name != "vkm") spec.names.push_back(c.name);
  }
  if (!cfg.no_outcome_mean)
    spec.outcome_avg_window =
        cfg.outcome_mean_window.empty() ? p.pre_range() : parse_range(cfg.outcome_mean_window, "--outcome-mean");
  return spec;
}

inline YearRange configured_effect_window(const RunConfig& cfg, const Panel& p) {
  return cfg.effect_window.empty() ? p.post_range() : parse_range(cfg.effect_window, "--effect-window");
}

inline fs::path ensure_out(const RunConfig& cfg) {
  fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("output directory '" + cfg.out + "' is not writable");
  return dir;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

inline void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

inline Json run_header(const RunConfig& cfg, const Panel& p) {
  return {{"command", cfg.command},
          {"source", cfg.builtin.empty() ? cfg.panel : "builtin:" + cfg.builtin},
          {"treated", p.treated_unit()},
          {"t0", p.t0()},
          {"window", {p.window().first, p.window().last}},
          {"outcome_mode", cfg.outcome},
          {"outcome_label", p.outcome_label()},
          {"method", cfg.method}};
}

inline svg::Chart trajectory_chart(const Panel& p, const YearSeries& synthetic, const std::string& synth_label) {
  svg::Chart c;
  c.title = "Outcome: " + p.treated_unit() + " and " + synth_label;
  c.x_label = "year";
  c.y_label = p.outcome_label();
  std::vector<double> years(p.periods().begin(), p.periods().end());
  const Eigen::VectorXd y1 = p.treated_outcomes();
  c.lines.push_back({p.treated_unit(), years, std::vector<double>(y1.data(), y1.data() + y1.size()), "black", 2.0, false});
  std::vector<double> sy(synthetic.years.begin(), synthetic.years.end());
  c.lines.push_back({synth_label, sy,
                     std::vector<double>(synthetic.values.data(), synthetic.values.data() + synthetic.values.size()),
                     "black", 1.5, true});
  c.vertical_marker = p.t0() - 0.5;
  return c;
}

// ---------------------------------------------------------------- commands

inline int cmd_fit(const RunConfig& cfg) {
  const Panel p = load_configured_panel(cfg);
  const PredictorSpec spec = configured_spec(cfg, p);
  const YearRange ew = configured_effect_window(cfg, p);
  const int baseline = cfg.baseline_year.value_or(p.t0() - 1);
  const fs::path dir = ensure_out(cfg);
  Json j = run_header(cfg, p);

  if (cfg.method == "scm" || cfg.method == "ascm") {
    AugmentedOptions aopt;
    aopt.lambda = cfg.lambda;
    aopt.effect_window = ew;
    const ScmFit fit = solve_outer(p, spec);
    const EffectEstimate effect = average_effect(p, fit.gaps, ew, baseline);
    j["fit"] = to_json(fit);
    j["effect"] = to_json(effect);
    svg::Chart chart = trajectory_chart(p, fit.synthetic, "synthetic " + p.treated_unit());
    std::ostringstream gaps;
    write_gaps_csv(gaps, fit);
    if (cfg.method == "ascm") {
      const AugmentedFit aug = ridge_augment(p, fit, aopt);
      j["augmented"] = to_json(aug);
      EffectEstimate corrected = effect;
      corrected.mean_gap = aug.corrected_effect;
      corrected.percent = corrected.percent_defined ? 100.0 * aug.corrected_effect / effect.baseline_outcome : 0.0;
      j["effect"] = to_json(corrected);
      j["effect"]["base_mean_gap"] = effect.mean_gap;
      std::vector<double> ay(aug.corrected_synthetic.years.begin(), aug.corrected_synthetic.years.end());
      chart.lines.push_back({"augmented synthetic", ay,
                             std::vector<double>(aug.corrected_synthetic.values.data(),
                                                 aug.corrected_synthetic.values.data() +
                                                     aug.corrected_synthetic.values.size()),
                             "gray", 1.5, true});
    }
    write_text(dir / "gaps.csv", gaps.str());
    write_text(dir / "trajectory.svg", svg::render(chart));
  } else if (cfg.method == "sdid") {
    const SdidFit s = sdid_estimate(p);
    j["sdid"] = to_json(s);
    const Eigen::VectorXd synth = p.donor_outcomes() * s.unit_weights.w;
    YearSeries sy{p.periods(), synth.array() + s.unit_intercept};
    YearSeries obs{p.periods(), p.treated_outcomes()};
    GapSeries g{p.periods(), obs.values - sy.values};
    EffectEstimate e = average_effect(p, g, ew, baseline);
    e.mean_gap = s.tau;
    e.percent = e.percent_defined ? 100.0 * s.tau / e.baseline_outcome : 0.0;
    j["effect"] = to_json(e);
    std::ostringstream gaps;
    gaps << "year,observed,synthetic,gap\n";
    for (std::size_t t = 0; t < p.period_count(); ++t) {
      const auto i = static_cast<Eigen::Index>(t);
      gaps << p.periods()[t] << ',' << synthctl::detail::format_number(obs.values[i]) << ','
           << synthctl::detail::format_number(sy.values[i]) << ',' << synthctl::detail::format_number(g.values[i])
           << '\n';
    }
    write_text(dir / "gaps.csv", gaps.str());
    write_text(dir / "trajectory.svg", svg::render(trajectory_chart(p, sy, "SDID unit-weighted control")));
  } else {
    throw UsageError("--method must be scm, ascm or sdid");
  }
  write_json(dir / "fit.json", j);
  return kExitOk;
}

inline int cmd_placebo(const RunConfig& cfg) {
  const Panel p = load_configured_panel(cfg);
  const PredictorSpec spec = configured_spec(cfg, p);
  const fs::path dir = ensure_out(cfg);
  PlaceboOptions opts;
  opts.jobs = cfg.jobs;
  opts.trim_factor = cfg.trim;
  const PlaceboStudy study = placebo_in_space(p, spec, opts);
  Json j = run_header(cfg, p);
  j["placebo"] = to_json(study);
  write_json(dir / "placebo.json", j);
  std::ostringstream ratios, gaps;
  write_ratio_table_csv(ratios, study);
  write_text(dir / "placebo_ratios.csv", ratios.str());
  const GapsPlotData data = gaps_plot_data(study);
  write_gaps_table_csv(gaps, data);
  write_text(dir / "placebo_gaps.csv", gaps.str());

  svg::Chart c;
  c.title = "Gaps: " + p.treated_unit() + " and placebo units";
  c.x_label = "year";
  c.y_label = "gap in " + p.outcome_label();
  c.vertical_marker = p.t0() - 0.5;
  c.horizontal_marker = 0.0;
  c.legend = false;
  std::vector<double> years(data.years.begin(), data.years.end());
  for (const auto& s : data.series)
    if (!s.treated) c.lines.push_back({s.unit, years, {s.gaps.data(), s.gaps.data() + s.gaps.size()}, "#bbbbbb", 1.0, false});
  for (const auto& s : data.series)
    if (s.treated) c.lines.push_back({s.unit, years, {s.gaps.data(), s.gaps.data() + s.gaps.size()}, "black", 2.0, false});
  write_text(dir / "placebo_gaps.svg", svg::render(c));
  return kExitOk;
}

inline int cmd_bootstrap(const RunConfig& cfg) {
  const Panel p = load_configured_panel(cfg);
  const PredictorSpec spec = configured_spec(cfg, p);
  const fs::path dir = ensure_out(cfg);
  BootstrapOptions opts;
  opts.draws = cfg.draws;
  opts.sample_size = cfg.sample_size;
  opts.level = cfg.level;
  opts.seed = cfg.seed;
  opts.jobs = cfg.jobs;
  opts.effect_window = configured_effect_window(cfg, p);
  const BootstrapResult r = bootstrap_ci(p, spec, opts);
  Json j = run_header(cfg, p);
  j["bootstrap"] = to_json(r);
  write_json(dir / "bootstrap.json", j);

  std::ostringstream est;
  est << "draw,estimate\n";
  for (std::size_t b = 0; b < r.estimates.size(); ++b)
    est << b << ',' << synthctl::detail::format_number(r.estimates[b]) << '\n';
  write_text(dir / "bootstrap_estimates.csv", est.str());

  std::optional<double> cap;
  if (!cfg.no_display_cap) cap = cfg.display_cap;
  const auto bins = svg::histogram(r.estimates, 30, cap);
  int hidden = 0;
  for (double e : r.estimates) hidden += (cap && e > *cap) ? 1 : 0;
  std::ostringstream hist;
  hist << "bin_low,bin_high,count\n";
  for (const auto& b : bins)
    hist << synthctl::detail::format_number(b.low) << ',' << synthctl::detail::format_number(b.high) << ',' << b.count
         << '\n';
  write_text(dir / "bootstrap_histogram.csv", hist.str());
  std::string title = "Bootstrap estimates (" + std::to_string(r.draws) + " draws)";
  if (cap) title += ", values above " + svg::num(*cap) + " not displayed (" + std::to_string(hidden) + ")";
  write_text(dir / "bootstrap_histogram.svg", svg::render_histogram(bins, title, "average effect"));
  return kExitOk;
}

inline int cmd_simulate(const RunConfig& cfg) {
  FactorModelConfig sc = cfg.sim;
  sc.seed = cfg.seed;
  sc.treatment_effect = {cfg.sim_effect};
  const SimulatedPanel sim = generate_detailed(sc);
  const fs::path dir = ensure_out(cfg);
  const Panel& p = sim.panel;
  std::ostringstream out;
  out << "unit,year,outcome,passengers,vkm";
  for (const auto& c : p.predictors()) out << ',' << c.name;
  out << '\n';
  for (std::size_t i = 0; i < p.unit_count(); ++i)
    for (std::size_t t = 0; t < p.period_count(); ++t) {
      const auto ii = static_cast<Eigen::Index>(i), tt = static_cast<Eigen::Index>(t);
      out << p.units()[i] << ',' << p.periods()[t] << ',' << synthctl::detail::format_number(p.outcomes()(ii, tt))
          << ',' << synthctl::detail::format_number(sim.passengers(ii, tt)) << ','
          << synthctl::detail::format_number(sim.vkm(ii, tt));
      for (const auto& c : p.predictors()) out << ',' << synthctl::detail::format_number(c.values(ii, tt));
      out << '\n';
    }
  write_text(dir / "panel.csv", out.str());
  Json meta{{"command", "simulate"},
            {"treated", p.treated_unit()},
            {"t0", p.t0()},
            {"seed", sc.seed},
            {"n_donors", sc.n_donors},
            {"n_pre", sc.n_pre},
            {"n_post", sc.n_post},
            {"n_factors", sc.n_factors},
            {"noise_sd", sc.noise_sd},
            {"treatment_effect", cfg.sim_effect},
            {"true_weights", vector_json(sim.mix)}};
  write_json(dir / "simulation.json", meta);
  return kExitOk;
}

inline int cmd_ingest(const RunConfig& cfg) {
  const Panel p = load_configured_panel(cfg);
  const fs::path dir = ensure_out(cfg);
  std::ostringstream csv;
  write_panel(csv, p);
  write_text(dir / "panel.csv", csv.str());
  Json j = run_header(cfg, p);
  j["units"] = p.units();
  j["periods"] = p.periods();
  j["donor_count"] = p.donor_count();
  j["predictors"] = Json::array();
  for (const auto& c : p.predictors()) j["predictors"].push_back(c.name);
  if (cfg.builtin == "geneva") {
    const GenevaDataset g = geneva_dataset();
    Json rows = Json::array();
    const auto tpg = ratio_metric(g.tpg), ctl = ratio_metric(g.control_mean);
    for (std::size_t t = 0; t < g.tpg.years.size(); ++t)
      rows.push_back({{"year", g.tpg.years[t]},
                      {"tpg_ratio", tpg[t]},
                      {"tpg_metric_printed", g.tpg_metric[t]},
                      {"control_ratio_of_means", ctl[t]},
                      {"control_metric_printed", g.control_metric[t]}});
    j["geneva_metric"] = rows;
    Json w = Json::array();
    for (const auto& cw : g.weights) w.push_back({{"company", cw.company}, {"weight", cw.weight}});
    j["geneva_weights"] = w;
    const auto& r = g.reference;
    j["geneva_reference"] = {{"average_effect", r.average_effect}, {"percent_effect", r.percent_effect},
                             {"pre_mspe", r.pre_mspe},             {"treated_mspe_ratio", r.treated_mspe_ratio},
                             {"ci", {r.ci_low, r.ci_high}},         {"ascm_effect", r.ascm_effect},
                             {"sdid_effect", r.sdid_effect}};
  }
  write_json(dir / "ingest.json", j);
  return kExitOk;
}

inline Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("missing artifact '" + path.filename().string() + "' in " + path.parent_path().string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("artifact '" + path.filename().string() + "' is not valid JSON: " + e.what());
  }
}

inline std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline int cmd_report(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  if (!fs::is_directory(dir)) throw UsageError("run directory '" + cfg.out + "' does not exist");
  const Json fit = read_json_file(dir / "fit.json");
  std::ostringstream md;
  md << "# Synthetic control run summary\n\n";
  md << "- treated unit: " << fit.value("treated", "") << "\n";
  md << "- first treated year: " << fit.value("t0", 0) << "\n";
  md << "- outcome: " << fit.value("outcome_label", "") << " (" << fit.value("outcome_mode", "") << ")\n";
  md << "- method: " << fit.value("method", "") << "\n\n";
  if (fit.contains("effect")) {
    const auto& e = fit["effect"];
    md << "## Effect\n\n";
    md << "Average gap " << fmt(e.value("mean_gap", 0.0)) << " over " << e["window"][0].get<int>() << "-"
       << e["window"][1].get<int>() << ", " << e.value("percent_text", "") << " of the " << e.value("baseline_year", 0)
       << " outcome.\n\n";
  }
  if (fit.contains("fit")) {
    const auto& f = fit["fit"];
    md << "Pre-treatment MSPE " << fmt(f.value("pre_mspe", 0.0), 6) << ", post-treatment MSPE "
       << fmt(f.value("post_mspe", 0.0), 6) << ".\n\n";
    md << "| donor | weight |\n|---|---|\n";
    for (const auto& w : f["weights"]) md << "| " << w["donor"].get<std::string>() << " | " << fmt(w["weight"].get<double>(), 3) << " |\n";
    md << "\n";
  }
  if (fit.contains("augmented"))
    md << "Ridge-augmented effect " << fmt(fit["augmented"].value("corrected_effect", 0.0)) << " (lambda "
       << fit["augmented"].value("lambda", 0.0) << ").\n\n";
  if (fit.contains("sdid")) md << "SDID estimate " << fmt(fit["sdid"].value("tau", 0.0)) << ".\n\n";
  if (fs::exists(dir / "placebo.json")) {
    const Json pj = read_json_file(dir / "placebo.json");
    const auto& s = pj["placebo"];
    md << "## Placebo study\n\n";
    md << "Treated MSPE ratio " << (s["treated_ratio"].is_null() ? std::string("inf") : fmt(s["treated_ratio"].get<double>(), 2));
    if (!s["rank"].is_null())
      md << ", rank " << s["rank"].get<int>() << " of " << s["units_ranked"].get<int>() << ", p = "
         << fmt(s["p_value"].get<double>(), 3);
    md << ".\n\n";
  }
  if (fs::exists(dir / "bootstrap.json")) {
    const Json bj = read_json_file(dir / "bootstrap.json");
    const auto& b = bj["bootstrap"];
    md << "## Bootstrap\n\n" << fmt(100.0 * b.value("level", 0.95), 0) << "% interval [" << fmt(b.value("ci_low", 0.0), 3)
       << "; " << fmt(b.value("ci_high", 0.0), 3) << "] from " << b.value("draws", 0) << " draws of "
       << b.value("sample_size", 0) << " donors.\n\n";
  }
  md << "## Figures\n\n";
  for (const char* f : {"trajectory.svg", "placebo_gaps.svg", "bootstrap_histogram.svg"})
    if (fs::exists(dir / f)) md << "- ![" << f << "](" << f << ")\n";
  write_text(dir / "report.md", md.str());
  return kExitOk;
}

// ---------------------------------------------------------------- entry

inline void print_error(std::ostream& err, const std::string& kind, const std::string& message,
                        const std::string& command) {
  Json j{{"error", {{"kind", kind}, {"message", message}, {"command", command}}}};
  err << j.dump() << '\n';
}

/// Parse and dispatch. Returns the process exit code; never throws.
inline int run(const std::vector<std::string>& args, std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"Synthetic control toolkit: fits, placebo inference, bootstrap, ASCM and SDID"};
  app.set_config("--config", "", "key=value configuration file (flags override it)");
  app.require_subcommand(1, 1);

  std::optional<int> sample_size;
  std::optional<double> lambda, trim;
  std::optional<int> t0, baseline;
  auto* o_panel = app.add_option("--panel", cfg.panel, "long-format panel CSV");
  app.add_option("--builtin", cfg.builtin, "builtin dataset (geneva)")->excludes(o_panel);
  app.add_option("--treated", cfg.treated, "treated unit identifier");
  app.add_option("--t0", t0, "first treated year");
  app.add_option("--window", cfg.window, "active window A:B");
  app.add_option("--outcome", cfg.outcome, "ratio | raw")->check(CLI::IsMember({"ratio", "raw"}));
  app.add_option("--outcome-column", cfg.outcome_column, "outcome column when no passengers/vkm pair");
  app.add_option("--predictors", cfg.predictors, "predictor columns (default: all)")->delimiter(',');
  app.add_option("--outcome-mean", cfg.outcome_mean_window, "window A:B for the averaged-outcome predictor");
  app.add_flag("--no-outcome-mean", cfg.no_outcome_mean, "do not match on the averaged outcome");
  app.add_option("--method", cfg.method, "scm | ascm | sdid")->check(CLI::IsMember({"scm", "ascm", "sdid"}));
  app.add_option("--lambda", lambda, "ridge penalty for ascm (default: cross-validated)");
  app.add_option("--effect-window", cfg.effect_window, "post-period window A:B for the average effect");
  app.add_option("--baseline-year", baseline, "year the percent effect is relative to (default t0-1)");
  app.add_option("--draws", cfg.draws, "bootstrap draws");
  app.add_option("--sample-size", sample_size, "donors drawn per bootstrap replicate (default: all)");
  app.add_option("--level", cfg.level, "confidence level");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--jobs", cfg.jobs, "worker threads for placebo/bootstrap")->check(CLI::PositiveNumber);
  app.add_option("--trim", trim, "drop placebo units with pre-MSPE above this multiple of the treated one");
  app.add_option("--display-cap", cfg.display_cap, "histogram display cap");
  app.add_flag("--no-display-cap", cfg.no_display_cap, "show every bootstrap estimate");
  app.add_option("--out", cfg.out, "output directory")->envname("SYNTHCTL_OUT");
  app.add_option("--sim-donors", cfg.sim.n_donors, "simulate: donors");
  app.add_option("--sim-pre", cfg.sim.n_pre, "simulate: pre-periods");
  app.add_option("--sim-post", cfg.sim.n_post, "simulate: post-periods");
  app.add_option("--sim-factors", cfg.sim.n_factors, "simulate: interactive factors");
  app.add_option("--sim-noise", cfg.sim.noise_sd, "simulate: noise standard deviation");
  app.add_option("--sim-effect", cfg.sim_effect, "simulate: constant treatment effect");
  app.add_option("--sim-first-year", cfg.sim.first_year, "simulate: first year");

  for (const char* name : {"ingest", "fit", "placebo", "bootstrap", "simulate", "report"}) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();
    sub->callback([&cfg, name] { cfg.command = name; });
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what(), cfg.command);
    return kExitUser;
  }
  cfg.t0 = t0;
  cfg.baseline_year = baseline;
  cfg.sample_size = sample_size;
  cfg.lambda = lambda;
  cfg.trim = trim;
  for (auto* sub : app.get_subcommands())
    if (cfg.command.empty()) cfg.command = sub->get_name();

  try {
    if (cfg.command == "fit") return cmd_fit(cfg);
    if (cfg.command == "placebo") return cmd_placebo(cfg);
    if (cfg.command == "bootstrap") return cmd_bootstrap(cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "ingest") return cmd_ingest(cfg);
    if (cfg.command == "report") return cmd_report(cfg);
    print_error(err, "usage", "unknown command", cfg.command);
    return kExitUser;
  } catch (const ValidationError& e) {
    print_error(err, e.kind(), e.what(), cfg.command);
    return kExitUser;
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what(), cfg.command);
    return kExitInternal;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what(), cfg.command);
    return kExitInternal;
  }
}

}  // namespace synthctl::cli
