#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace synthctl::svg {

struct Line {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "black";
  double width = 1.5;
  bool dashed = false;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Line> lines;
  std::optional<double> vertical_marker;    // e.g. the treatment year
  std::optional<double> horizontal_marker;  // e.g. zero gap
  bool legend = true;
};

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

namespace detail {

struct Frame {
  double x0, x1, y0, y1;
  static constexpr double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 55;
  [[nodiscard]] double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  [[nodiscard]] double py(double y) const { return top + (y1 - y) / (y1 - y0) * (height - top - bottom); }
};

inline void axes(std::ostringstream& o, const Frame& f, const std::string& title, const std::string& xl,
                 const std::string& yl, bool integer_x) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::width << "\" height=\"" << Frame::height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text class=\"title\" x=\"" << Frame::width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(title) << "</text>\n";
  const double bx = Frame::left, by = Frame::height - Frame::bottom;
  o << "<g class=\"axes\" stroke=\"black\"><line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\""
    << Frame::width - Frame::right << "\" y2=\"" << by << "\"/><line x1=\"" << bx << "\" y1=\"" << Frame::top
    << "\" x2=\"" << bx << "\" y2=\"" << by << "\"/></g>\n";
  for (int i = 0; i <= 5; ++i) {
    const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    o << "<text x=\"" << bx - 6 << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
      << "</text>\n";
  }
  const int ticks = integer_x ? static_cast<int>(std::min(12.0, f.x1 - f.x0)) : 5;
  for (int i = 0; i <= ticks && ticks > 0; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / ticks;
    char label[32];
    std::snprintf(label, sizeof label, integer_x ? "%.0f" : "%.2f", xv);
    o << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << by + 18 << "\" text-anchor=\"middle\">" << label
      << "</text>\n";
  }
  o << "<text x=\"" << Frame::width / 2 << "\" y=\"" << Frame::height - 12 << "\" text-anchor=\"middle\">"
    << escape(xl) << "</text>\n";
  o << "<text x=\"16\" y=\"" << Frame::height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << Frame::height / 2 << ")\">" << escape(yl) << "</text>\n";
}

}  // namespace detail

/// Multi-line chart (trajectories, gap overlays).
inline std::string render(const Chart& c) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& l : c.lines)
    for (std::size_t i = 0; i < l.x.size() && i < l.y.size(); ++i) {
      if (!std::isfinite(l.y[i])) continue;
      x0 = std::min(x0, l.x[i]);
      x1 = std::max(x1, l.x[i]);
      y0 = std::min(y0, l.y[i]);
      y1 = std::max(y1, l.y[i]);
    }
  if (c.horizontal_marker) {
    y0 = std::min(y0, *c.horizontal_marker);
    y1 = std::max(y1, *c.horizontal_marker);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  detail::Frame f{x0, x1, y0 - pad, y1 + pad};
  std::ostringstream o;
  detail::axes(o, f, c.title, c.x_label, c.y_label, true);
  if (c.vertical_marker)
    o << "<line class=\"marker\" x1=\"" << num(f.px(*c.vertical_marker)) << "\" y1=\"" << detail::Frame::top
      << "\" x2=\"" << num(f.px(*c.vertical_marker)) << "\" y2=\"" << detail::Frame::height - detail::Frame::bottom
      << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  if (c.horizontal_marker)
    o << "<line class=\"marker\" x1=\"" << detail::Frame::left << "\" y1=\"" << num(f.py(*c.horizontal_marker))
      << "\" x2=\"" << detail::Frame::width - detail::Frame::right << "\" y2=\"" << num(f.py(*c.horizontal_marker))
      << "\" stroke=\"gray\"/>\n";
  for (const auto& l : c.lines) {
    o << "<polyline class=\"series\" data-label=\"" << escape(l.label) << "\" fill=\"none\" stroke=\"" << l.color
      << "\" stroke-width=\"" << l.width << "\"" << (l.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < l.x.size() && i < l.y.size(); ++i)
      o << (i ? " " : "") << num(f.px(l.x[i])) << "," << num(f.py(l.y[i]));
    o << "\"/>\n";
  }
  if (c.legend) {
    double ly = detail::Frame::top + 8;
    for (const auto& l : c.lines) {
      if (l.label.empty()) continue;
      o << "<text class=\"legend\" x=\"" << detail::Frame::width - detail::Frame::right - 150 << "\" y=\"" << ly
        << "\" fill=\"" << l.color << "\">" << escape(l.label) << "</text>\n";
      ly += 14;
    }
  }
  o << "</svg>\n";
  return o.str();
}

struct Bin {
  double low;
  double high;
  int count;
};

/// Equal-width bins over [min, max] of the values, or of the values at or below
/// `display_cap` when one is given.
inline std::vector<Bin> histogram(const std::vector<double>& values, int bins,
                                  std::optional<double> display_cap = std::nullopt) {
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x) && (!display_cap || x <= *display_cap)) v.push_back(x);
  std::vector<Bin> out;
  if (v.empty() || bins < 1) return out;
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  double lo = *mn, hi = *mx;
  if (hi <= lo) hi = lo + 1e-9;
  const double width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) out.push_back({lo + b * width, lo + (b + 1) * width, 0});
  for (double x : v) {
    auto b = static_cast<int>((x - lo) / width);
    out[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))].count++;
  }
  return out;
}

inline std::string render_histogram(const std::vector<Bin>& bins, const std::string& title, const std::string& x_label,
                                    std::optional<double> marker = std::nullopt) {
  double x0 = 0, x1 = 1, y1 = 1;
  if (!bins.empty()) {
    x0 = bins.front().low;
    x1 = bins.back().high;
    for (const auto& b : bins) y1 = std::max(y1, static_cast<double>(b.count));
  }
  detail::Frame f{x0, x1, 0.0, y1 * 1.05};
  std::ostringstream o;
  detail::axes(o, f, title, x_label, "count", false);
  for (const auto& b : bins) {
    const double top = f.py(b.count), base = f.py(0);
    o << "<rect class=\"bar\" x=\"" << num(f.px(b.low)) << "\" y=\"" << num(top) << "\" width=\""
      << num(std::max(0.0, f.px(b.high) - f.px(b.low) - 1)) << "\" height=\"" << num(base - top)
      << "\" fill=\"#888888\"/>\n";
  }
  if (marker && *marker >= x0 && *marker <= x1)
    o << "<line class=\"marker\" x1=\"" << num(f.px(*marker)) << "\" y1=\"" << detail::Frame::top << "\" x2=\""
      << num(f.px(*marker)) << "\" y2=\"" << detail::Frame::height - detail::Frame::bottom
      << "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace synthctl::svg
