#include "culture/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace culture::svg {

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
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

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame make_frame(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  return {x0, x1, y0 - pad, y1 + pad};
}

std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"11\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + "<text x=\"" + num(kWidth / 2) +
         "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) + "</text>\n";
}

std::string axes(const Frame& f, const std::string& xl, const std::string& yl) {
  std::string s;
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" +
       num(kWidth - kRight) + "\" y2=\"" + num(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
       num(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double yv = f.y0 + (f.y1 - f.y0) * t / 4.0;
    const double xv = f.x0 + (f.x1 - f.x0) * t / 4.0;
    s += "<text x=\"" + num(kLeft - 5) + "\" y=\"" + num(f.py(yv) + 4) + "\" text-anchor=\"end\">" +
         num(yv) + "</text>\n";
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(kHeight - kBottom + 16) +
         "\" text-anchor=\"middle\">" + num(xv) + "</text>\n";
  }
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 15) + "\" text-anchor=\"middle\">" +
       escape(xl) + "</text>\n";
  s += "<text x=\"15\" y=\"" + num(kHeight / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " +
       num(kHeight / 2) + ")\">" + escape(yl) + "</text>\n";
  return s;
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  const Frame f = make_frame(x0, x1, y0, y1);
  std::string out = header(title) + axes(f, x_label, y_label);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      out += (k ? " " : "") + num(f.px(s.x[k])) + "," + num(f.py(s.y[k]));
    }
    out += "\"/>\n";
    out += "<text x=\"" + num(kWidth - kRight - 5) + "\" y=\"" + num(kTop + 14 * (i + 1)) +
           "\" text-anchor=\"end\" fill=\"" + color + "\">" + escape(s.label) + "</text>\n";
  }
  return out + "</svg>\n";
}

std::string scatter(const std::string& title, const std::string& x_label, const std::string& y_label,
                    const std::vector<Point>& points, bool diagonal) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& p : points) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (diagonal) {
    x0 = y0 = std::min(x0, y0);
    x1 = y1 = std::max(x1, y1);
  }
  const Frame f = make_frame(x0, x1, y0, y1);
  std::string out = header(title) + axes(f, x_label, y_label);
  if (diagonal) {
    out += "<line x1=\"" + num(f.px(x0)) + "\" y1=\"" + num(f.py(x0)) + "\" x2=\"" + num(f.px(x1)) +
           "\" y2=\"" + num(f.py(x1)) + "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (const auto& p : points) {
    const char* color = kPalette[static_cast<std::size_t>(std::abs(p.group)) % std::size(kPalette)];
    out += "<circle cx=\"" + num(f.px(p.x)) + "\" cy=\"" + num(f.py(p.y)) + "\" r=\"3\" fill=\"" +
           color + "\"><title>" + escape(p.label) + "</title></circle>\n";
    if (!p.label.empty()) {
      out += "<text x=\"" + num(f.px(p.x) + 4) + "\" y=\"" + num(f.py(p.y) - 4) + "\" font-size=\"9\">" +
             escape(p.label) + "</text>\n";
    }
  }
  return out + "</svg>\n";
}

std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& labels, const std::vector<double>& values) {
  double y0 = 0.0, y1 = 0.0;
  for (double v : values) y0 = std::min(y0, v), y1 = std::max(y1, v);
  const Frame f = make_frame(0.0, static_cast<double>(std::max<std::size_t>(values.size(), 1)), y0, y1);
  std::string out = header(title);
  out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(f.py(0)) + "\" x2=\"" + num(kWidth - kRight) +
         "\" y2=\"" + num(f.py(0)) + "\" stroke=\"black\"/>\n";
  out += "<text x=\"15\" y=\"" + num(kHeight / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " +
         num(kHeight / 2) + ")\">" + escape(y_label) + "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double yv = f.y0 + (f.y1 - f.y0) * t / 4.0;
    out += "<text x=\"" + num(kLeft - 5) + "\" y=\"" + num(f.py(yv) + 4) + "\" text-anchor=\"end\">" +
           num(yv) + "</text>\n";
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double xa = f.px(static_cast<double>(i) + 0.15), xb = f.px(static_cast<double>(i) + 0.85);
    const double ya = f.py(std::max(values[i], 0.0)), yb = f.py(std::min(values[i], 0.0));
    out += "<rect x=\"" + num(xa) + "\" y=\"" + num(ya) + "\" width=\"" + num(xb - xa) + "\" height=\"" +
           num(yb - ya) + "\" fill=\"" + kPalette[0] + "\"/>\n";
    const double xm = 0.5 * (xa + xb), yl = kHeight - kBottom + 12;
    out += "<text x=\"" + num(xm) + "\" y=\"" + num(yl) + "\" text-anchor=\"end\" font-size=\"9\" transform=\"rotate(-45 " +
           num(xm) + " " + num(yl) + ")\">" + escape(i < labels.size() ? labels[i] : "") + "</text>\n";
  }
  return out + "</svg>\n";
}

}  // namespace culture::svg
