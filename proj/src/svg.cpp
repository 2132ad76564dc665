#include "dualres/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace dualres::svg {
namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 480;
constexpr double kLeft = 80;
constexpr double kRight = 30;
constexpr double kTop = 40;
constexpr double kBottom = 60;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) lo = 0, hi = 1;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) lo -= 0.5, hi += 0.5;
  }
};

// 1-2-5 tick spacing giving roughly `target` ticks
double tick_step(const Range& r, int target) {
  const double raw = (r.hi - r.lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

std::string num(double v) { return fmt::format("{:.2f}", v); }

std::string tick_label(double v, double step) {
  if (std::abs(v) < step * 1e-9) v = 0.0;
  const int digits = std::max(0, -static_cast<int>(std::floor(std::log10(step))));
  return fmt::format("{:.{}f}", v, digits);
}

class Frame {
 public:
  Frame(Range x, Range y, double right_margin = kRight) : x_(x), y_(y), right_(kWidth - right_margin) {}

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (right_ - kLeft); }
  double py(double y) const { return kHeight - kBottom - (y - y_.lo) / (y_.hi - y_.lo) * (kHeight - kBottom - kTop); }
  double right() const { return right_; }

  std::string axes(const std::string& title, const std::string& xl, const std::string& yl) const {
    std::string s;
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000\"/>\n", num(kLeft),
                     num(kTop), num(right_ - kLeft), num(kHeight - kBottom - kTop));
    const double xs = tick_step(x_, 6);
    for (double v = std::ceil(x_.lo / xs) * xs; v <= x_.hi + 1e-9 * xs; v += xs) {
      s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#000\"/>\n", num(px(v)),
                       num(kHeight - kBottom), num(kHeight - kBottom + 5));
      s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(px(v)),
                       num(kHeight - kBottom + 20), tick_label(v, xs));
    }
    const double ys = tick_step(y_, 6);
    for (double v = std::ceil(y_.lo / ys) * ys; v <= y_.hi + 1e-9 * ys; v += ys) {
      s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#000\"/>\n", num(kLeft - 5),
                       num(py(v)), num(kLeft));
      s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", num(kLeft - 8), num(py(v) + 4),
                       tick_label(v, ys));
    }
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
                     num((kLeft + right_) / 2), num(kTop - 14), escape(title));
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num((kLeft + right_) / 2),
                     num(kHeight - 15), escape(xl));
    s += fmt::format("<text x=\"20\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">{1}</text>\n",
                     num((kTop + kHeight - kBottom) / 2), escape(yl));
    return s;
  }

 private:
  Range x_, y_;
  double right_;
};

std::string header() {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n",
      kWidth, kHeight);
}

// viridis-like ramp through five anchors
std::string colour(double t) {
  static constexpr std::array<std::array<double, 3>, 5> anchors = {
      {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  std::array<int, 3> rgb{};
  for (int k = 0; k < 3; ++k) rgb[k] = static_cast<int>(std::lround(anchors[i][k] + f * (anchors[i + 1][k] - anchors[i][k])));
  return fmt::format("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2]);
}

}  // namespace

std::string render(const LinePlot& plot) {
  Range xr, yr;
  for (const auto& s : plot.series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  for (double v : plot.vertical_markers) xr.add(v);
  if (plot.zero_line) yr.add(0.0);
  xr.finish();
  yr.finish();
  const Frame frame(xr, yr);

  std::string s = header();
  s += frame.axes(plot.title, plot.x_label, plot.y_label);
  if (plot.zero_line) {
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#888\"/>\n", num(kLeft),
                     num(frame.py(0.0)), num(frame.right()));
  }
  for (double v : plot.vertical_markers) {
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#444\" stroke-dasharray=\"6 4\"/>\n",
                     num(frame.px(v)), num(kTop), num(kHeight - kBottom));
  }
  int legend_row = 0;
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& series = plot.series[i];
    const char* c = kPalette[i % kPalette.size()];
    if (series.markers) {
      for (std::size_t k = 0; k < series.x.size() && k < series.y.size(); ++k) {
        if (!std::isfinite(series.x[k]) || !std::isfinite(series.y[k])) continue;
        s += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n", num(frame.px(series.x[k])),
                         num(frame.py(series.y[k])), c);
      }
    } else {
      std::string points;
      for (std::size_t k = 0; k < series.x.size() && k < series.y.size(); ++k) {
        if (!std::isfinite(series.x[k]) || !std::isfinite(series.y[k])) continue;
        if (!points.empty()) points += ' ';
        points += num(frame.px(series.x[k])) + ',' + num(frame.py(series.y[k]));
      }
      s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", c, points);
    }
    if (!series.label.empty()) {
      const double y = kTop + 16 + 16 * legend_row++;
      s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", num(frame.right() - 150),
                       num(y - 9), c);
      s += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(frame.right() - 135), num(y), escape(series.label));
    }
  }
  s += "</svg>\n";
  return s;
}

std::string render(const Heatmap& map) {
  Range xr, yr, zr;
  for (double v : map.x) xr.add(v);
  for (double v : map.y) yr.add(v);
  for (Eigen::Index i = 0; i < map.z.size(); ++i) zr.add(map.z.data()[i]);
  // pad half a cell so edge cells are fully visible
  const double dx = map.x.size() > 1 ? (xr.hi - xr.lo) / static_cast<double>(map.x.size() - 1) : 1.0;
  const double dy = map.y.size() > 1 ? (yr.hi - yr.lo) / static_cast<double>(map.y.size() - 1) : 1.0;
  xr.finish();
  yr.finish();
  zr.finish();
  xr.lo -= dx / 2, xr.hi += dx / 2;
  yr.lo -= dy / 2, yr.hi += dy / 2;
  const Frame frame(xr, yr, 110);

  std::string s = header();
  for (Eigen::Index r = 0; r < map.z.rows() && r < static_cast<Eigen::Index>(map.y.size()); ++r) {
    for (Eigen::Index c = 0; c < map.z.cols() && c < static_cast<Eigen::Index>(map.x.size()); ++c) {
      const double x0 = frame.px(map.x[c] - dx / 2), x1 = frame.px(map.x[c] + dx / 2);
      const double y0 = frame.py(map.y[r] + dy / 2), y1 = frame.py(map.y[r] - dy / 2);
      s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", num(x0), num(y0),
                       num(x1 - x0 + 0.3), num(y1 - y0 + 0.3), colour((map.z(r, c) - zr.lo) / (zr.hi - zr.lo)));
    }
  }
  s += frame.axes(map.title, map.x_label, map.y_label);
  const double bar_x = frame.right() + 20;
  for (int k = 0; k < 50; ++k) {
    const double t = (k + 0.5) / 50.0;
    const double y = kTop + (1.0 - (k + 1) / 50.0) * (kHeight - kBottom - kTop);
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"16\" height=\"{}\" fill=\"{}\"/>\n", num(bar_x), num(y),
                     num((kHeight - kBottom - kTop) / 50.0 + 0.3), colour(t));
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(bar_x + 20), num(kTop + 8), fmt::format("{:.3g}", zr.hi));
  s += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(bar_x + 20), num(kHeight - kBottom),
                   fmt::format("{:.3g}", zr.lo));
  s += "</svg>\n";
  return s;
}

}  // namespace dualres::svg
