#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synthctl/error.hpp"
#include "synthctl/panel.hpp"

namespace synthctl {

/// How a long-format CSV maps onto a Panel.
struct PanelSchema {
  std::string unit_column = "unit";
  std::string year_column = "year";
  /// Outcome taken verbatim from this column ...
  std::string outcome_column = "outcome";
  /// ... unless a (numerator, denominator) pair is given, e.g. {"passengers", "vkm"}.
  std::optional<std::pair<std::string, std::string>> outcome_ratio;
  /// Predictor columns to keep; nullopt keeps every column not used for the outcome.
  std::optional<std::vector<std::string>> predictor_columns;
  std::string treated;
  int t0 = 0;
  /// Active window; missing cells are only an error inside it.
  std::optional<YearRange> window;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Split one CSV record; double quotes may wrap a field, "" escapes a quote.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

inline double parse_number(std::string_view cell, const std::string& column, std::size_t line) {
  cell = trim(cell);
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* first = cell.data();
  if (!cell.empty() && cell.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw ValidationError("unparseable numeric value '" + std::string(cell) + "' in column '" + column +
                          "' at line " + std::to_string(line));
  return v;
}

inline int parse_year(std::string_view cell, std::size_t line) {
  cell = trim(cell);
  int v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw ValidationError("unparseable year '" + std::string(cell) + "' at line " + std::to_string(line));
  return v;
}

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
  return std::string(buf, ptr);
}

}  // namespace detail

/// Parse a long-format panel (one row per unit and year) from a stream.
inline Panel read_panel(std::istream& in, const PanelSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) {
      header = detail::split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw ValidationError("panel CSV is empty");
  if (!header.empty() && header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
    header[0].erase(0, 3);

  auto col_of = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError("panel CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t unit_col = col_of(schema.unit_column);
  const std::size_t year_col = col_of(schema.year_column);
  std::vector<std::string> used{schema.unit_column, schema.year_column};
  std::size_t num_col = 0, den_col = 0, out_col = 0;
  if (schema.outcome_ratio) {
    num_col = col_of(schema.outcome_ratio->first);
    den_col = col_of(schema.outcome_ratio->second);
    used.push_back(schema.outcome_ratio->first);
    used.push_back(schema.outcome_ratio->second);
  } else {
    out_col = col_of(schema.outcome_column);
    used.push_back(schema.outcome_column);
  }
  std::vector<std::string> pred_names;
  if (schema.predictor_columns) {
    pred_names = *schema.predictor_columns;
    for (const auto& n : pred_names) (void)col_of(n);
  } else {
    for (const auto& h : header)
      if (std::find(used.begin(), used.end(), h) == used.end()) pred_names.push_back(h);
  }
  std::vector<std::size_t> pred_cols;
  for (const auto& n : pred_names) pred_cols.push_back(col_of(n));

  struct Row {
    double outcome;
    std::vector<double> preds;
    std::size_t line;
  };
  std::map<std::string, std::map<int, Row>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw ValidationError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " fields, header has " + std::to_string(header.size()));
    const std::string& unit = cells[unit_col];
    if (unit.empty()) throw ValidationError("empty unit identifier at line " + std::to_string(line_no));
    const int year = detail::parse_year(cells[year_col], line_no);
    Row r;
    r.line = line_no;
    if (schema.outcome_ratio) {
      const double num = detail::parse_number(cells[num_col], header[num_col], line_no);
      const double den = detail::parse_number(cells[den_col], header[den_col], line_no);
      if (std::isnan(num) || std::isnan(den)) {
        r.outcome = std::numeric_limits<double>::quiet_NaN();
      } else {
        r.outcome = ratio_metric(SeriesPair{{year}, {num}, {den}}).front();
      }
    } else {
      r.outcome = detail::parse_number(cells[out_col], header[out_col], line_no);
    }
    for (std::size_t c = 0; c < pred_cols.size(); ++c)
      r.preds.push_back(detail::parse_number(cells[pred_cols[c]], header[pred_cols[c]], line_no));
    auto [it, inserted] = rows[unit].emplace(year, std::move(r));
    if (!inserted)
      throw ValidationError("duplicate row for (" + unit + ", " + std::to_string(year) + ") at line " +
                            std::to_string(line_no) + " (first at line " + std::to_string(it->second.line) + ")");
  }
  if (rows.empty()) throw ValidationError("panel CSV has no data rows");

  int y_min = std::numeric_limits<int>::max(), y_max = std::numeric_limits<int>::min();
  for (const auto& [u, by_year] : rows) {
    y_min = std::min(y_min, by_year.begin()->first);
    y_max = std::max(y_max, by_year.rbegin()->first);
  }
  YearRange win{y_min, y_max};
  if (schema.window) {
    if (!schema.window->within(win))
      throw ValidationError("window " + to_string(*schema.window) + " not inside data years " + to_string(win));
    win = *schema.window;
  }

  std::vector<std::string> units;
  for (const auto& [u, _] : rows) units.push_back(u);  // std::map: sorted
  std::vector<int> years;
  for (int y = win.first; y <= win.last; ++y) years.push_back(y);
  const auto nu = static_cast<Eigen::Index>(units.size());
  const auto nt = static_cast<Eigen::Index>(years.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(nu, nt, nan);
  std::vector<PredictorColumn> preds;
  for (const auto& n : pred_names) preds.push_back({n, Eigen::MatrixXd::Constant(nu, nt, nan)});
  for (Eigen::Index i = 0; i < nu; ++i) {
    for (const auto& [year, r] : rows.at(units[static_cast<std::size_t>(i)])) {
      if (!win.contains(year)) continue;
      const Eigen::Index t = year - win.first;
      y(i, t) = r.outcome;
      for (std::size_t c = 0; c < preds.size(); ++c) preds[c].values(i, t) = r.preds[c];
    }
  }
  for (Eigen::Index i = 0; i < nu; ++i)
    for (Eigen::Index t = 0; t < nt; ++t)
      if (std::isnan(y(i, t)))
        throw ValidationError("missing outcome for unit '" + units[static_cast<std::size_t>(i)] + "' in year " +
                              std::to_string(years[static_cast<std::size_t>(t)]) + " inside window " +
                              to_string(win));
  std::string label = schema.outcome_ratio
                          ? schema.outcome_ratio->first + "_per_" + schema.outcome_ratio->second
                          : schema.outcome_column;
  return Panel(std::move(units), std::move(years), std::move(y), schema.treated, schema.t0, std::move(preds),
               std::move(label));
}

inline Panel load_panel(const std::string& path, const PanelSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open panel file '" + path + "'");
  return read_panel(in, schema);
}

/// Emit the long CSV format read by read_panel: unit,year,<outcome>,<predictors...>.
inline void write_panel(std::ostream& out, const Panel& p) {
  out << "unit,year," << p.outcome_label();
  for (const auto& c : p.predictors()) out << ',' << c.name;
  out << '\n';
  for (std::size_t i = 0; i < p.unit_count(); ++i) {
    for (std::size_t t = 0; t < p.period_count(); ++t) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto tt = static_cast<Eigen::Index>(t);
      out << p.units()[i] << ',' << p.periods()[t] << ',' << detail::format_number(p.outcomes()(ii, tt));
      for (const auto& c : p.predictors()) out << ',' << detail::format_number(c.values(ii, tt));
      out << '\n';
    }
  }
}

inline void write_panel(const std::string& path, const Panel& p) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write panel file '" + path + "'");
  write_panel(out, p);
}

}  // namespace synthctl
