#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "error.hpp"

namespace aucoder::svg {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
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

std::string tick_label(double v) {
  char buf[48];
  if (std::abs(v - std::round(v)) < 1e-9 && std::abs(v) < 1e9) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%g", v);
  }
  return buf;
}

std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 ? 0.0 : v);
  return t;
}

std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> t;
  for (int e = static_cast<int>(std::floor(std::log10(lo))); e <= static_cast<int>(std::ceil(std::log10(hi))); ++e) {
    for (double m : {1.0, 2.0, 5.0}) {
      const double v = m * std::pow(10.0, e);
      if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) t.push_back(v);
    }
  }
  return t;
}

}  // namespace

std::string line_chart(const std::vector<Series>& series, const ChartOptions& opt) {
  const double left = 70, right = 180, top = 40, bottom = 60;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) fail(ErrorCode::InvalidArgument, "chart series '" + s.name + "' is ragged");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (opt.log_x && !(s.x[i] > 0.0)) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 1.0;
    xmax = 10.0;
    ymin = 0.0;
    ymax = 100.0;
  }
  if (xmax <= xmin) xmax = opt.log_x ? xmin * 10.0 : xmin + 1.0;
  if (ymax <= ymin) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto sx = [&](double x) {
    const double f = opt.log_x ? (std::log10(x) - std::log10(xmin)) / (std::log10(xmax) - std::log10(xmin))
                               : (x - xmin) / (xmax - xmin);
    return left + f * pw;
  };
  auto sy = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) + "\" height=\"" +
       std::to_string(opt.height) + "\" viewBox=\"0 0 " + std::to_string(opt.width) + " " +
       std::to_string(opt.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + num(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(opt.title) +
       "</text>\n";
  o += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (double t : opt.log_x ? log_ticks(xmin, xmax) : linear_ticks(xmin, xmax)) {
    const double x = sx(t);
    o += "<line x1=\"" + num(x) + "\" y1=\"" + num(top) + "\" x2=\"" + num(x) + "\" y2=\"" + num(top + ph) +
         "\" stroke=\"#ddd\"/>\n";
    o += "<text x=\"" + num(x) + "\" y=\"" + num(top + ph + 16) + "\" text-anchor=\"middle\">" + tick_label(t) +
         "</text>\n";
  }
  for (double t : linear_ticks(ymin, ymax)) {
    const double y = sy(t);
    o += "<line x1=\"" + num(left) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left + pw) + "\" y2=\"" + num(y) +
         "\" stroke=\"#ddd\"/>\n";
    o += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + tick_label(t) +
         "</text>\n";
  }
  o += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(opt.height - 14.0) + "\" text-anchor=\"middle\">" +
       escape(opt.x_label) + (opt.log_x ? " (log scale)" : "") + "</text>\n";
  o += "<text x=\"18\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       num(top + ph / 2) + ")\">" + escape(opt.y_label) + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::string color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (opt.log_x && !(s.x[i] > 0.0)) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!pts.empty()) pts += ' ';
      pts += num(sx(s.x[i])) + "," + num(sy(s.y[i]));
    }
    o += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    const double ly = top + 14.0 + 20.0 * static_cast<double>(si);
    o += "<line x1=\"" + num(left + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(left + pw + 36) + "\" y2=\"" +
         num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + num(left + pw + 42) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.name) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

std::string component_plot(const ComponentView& v) {
  if (v.displacement.size() != static_cast<Eigen::Index>(kFeatureRows))
    fail(ErrorCode::InvalidArgument, "component plot needs a 136-row displacement");
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  std::vector<Point2> moved(kTemplatePoints);
  for (std::size_t k = 0; k < kTemplatePoints; ++k) {
    moved[k] = {v.neutral[k].x + v.scale * v.displacement(static_cast<Eigen::Index>(2 * k)),
                v.neutral[k].y + v.scale * v.displacement(static_cast<Eigen::Index>(2 * k + 1))};
    if (!v.mask[k]) continue;
    for (const auto& p : {v.neutral[k], moved[k]}) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  if (xmin > xmax) {
    xmin = ymin = 0.0;
    xmax = ymax = 200.0;
  }
  const double pad = 10.0;
  const double w = xmax - xmin + 2 * pad, h = ymax - ymin + 2 * pad + 16.0;
  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + num(xmin - pad) + " " + num(ymin - pad - 16.0) + " " +
       num(w) + " " + num(h) + "\" width=\"" + num(3 * w) + "\" height=\"" + num(3 * h) +
       "\" font-family=\"sans-serif\" font-size=\"6\">\n";
  o += "<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"4\" markerHeight=\"4\" "
       "orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#555\"/></marker></defs>\n";
  o += "<rect x=\"" + num(xmin - pad) + "\" y=\"" + num(ymin - pad - 16.0) + "\" width=\"" + num(w) + "\" height=\"" +
       num(h) + "\" fill=\"white\"/>\n";
  o += "<text x=\"" + num(xmin) + "\" y=\"" + num(ymin - pad - 6.0) + "\">" + escape(v.title) + " (scale " +
       num(v.scale) + ")</text>\n";
  for (std::size_t k = 0; k < kTemplatePoints; ++k) {
    if (!v.mask[k]) continue;
    o += "<line class=\"arrow\" data-k=\"" + std::to_string(k) + "\" x1=\"" + num(v.neutral[k].x) + "\" y1=\"" +
         num(v.neutral[k].y) + "\" x2=\"" + num(moved[k].x) + "\" y2=\"" + num(moved[k].y) +
         "\" stroke=\"#555\" stroke-width=\"0.6\" marker-end=\"url(#head)\"/>\n";
  }
  for (std::size_t k = 0; k < kTemplatePoints; ++k) {
    if (!v.mask[k]) continue;
    o += "<circle cx=\"" + num(v.neutral[k].x) + "\" cy=\"" + num(v.neutral[k].y) + "\" r=\"1.2\" fill=\"red\"/>\n";
    o += "<circle cx=\"" + num(moved[k].x) + "\" cy=\"" + num(moved[k].y) + "\" r=\"1.2\" fill=\"green\"/>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace aucoder::svg
