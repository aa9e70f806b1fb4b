#include "onc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace onc::plot {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const {
    const double span = x1 > x0 ? x1 - x0 : 1.0;
    return kLeft + (x - x0) / span * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    const double span = y1 > y0 ? y1 - y0 : 1.0;
    return kHeight - kBottom - (y - y0) / span * (kHeight - kTop - kBottom);
  }
};

void header(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";
}

double nice_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return mag * (r <= 1.0 ? 1.0 : r <= 2.0 ? 2.0 : r <= 5.0 ? 5.0 : 10.0);
}

std::string tick(double v, double step) {
  if (std::abs(v) < step * 1e-9) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Widens [lo, hi] outward to whole multiples of a round step.
void snap(double& lo, double& hi) {
  const double step = nice_step(hi - lo);
  lo = std::floor(lo / step + 1e-9) * step;
  hi = std::ceil(hi / step - 1e-9) * step;
}

void axes(std::ostringstream& out, const Frame& f, const std::string& x_label,
          const std::string& y_label, bool x_ticks) {
  const double bottom = kHeight - kBottom;
  out << "<line x1=\"" << kLeft << "\" y1=\"" << bottom << "\" x2=\"" << kWidth - kRight
      << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";
  const double ys = nice_step(f.y1 - f.y0);
  for (double y = std::ceil(f.y0 / ys - 1e-9) * ys; y <= f.y1 + ys * 1e-9; y += ys) {
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(f.py(y) + 4) << "\" text-anchor=\"end\">"
        << tick(y, ys) << "</text>\n";
  }
  if (x_ticks) {
    const double xs = nice_step(f.x1 - f.x0);
    for (double x = std::ceil(f.x0 / xs - 1e-9) * xs; x <= f.x1 + xs * 1e-9; x += xs) {
      out << "<text x=\"" << num(f.px(x)) << "\" y=\"" << bottom + 16 << "\" text-anchor=\"middle\">"
          << tick(x, xs) << "</text>\n";
    }
  }
  out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << (kTop + bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (kTop + bottom) / 2 << ")\">" << escape(y_label) << "</text>\n";
}

}  // namespace

std::string line_chart(const std::string& title, const std::vector<double>& x,
                       const std::vector<Series>& series, const std::string& x_label,
                       const std::string& y_label) {
  Frame f{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
  for (double v : x) {
    f.x0 = std::min(f.x0, v);
    f.x1 = std::max(f.x1, v);
  }
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      const double half = i < s.band.size() ? s.band[i] : 0.0;
      f.y0 = std::min(f.y0, s.y[i] - half);
      f.y1 = std::max(f.y1, s.y[i] + half);
    }
  }
  if (x.empty() || series.empty()) f = Frame{0, 1, 0, 1};
  snap(f.y0, f.y1);

  std::ostringstream out;
  header(out, title);
  axes(out, f, x_label, y_label, true);
  double legend_y = kTop + 8;
  for (const auto& s : series) {
    const std::size_t n = std::min(x.size(), s.y.size());
    if (!s.band.empty() && n > 0) {
      out << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < n; ++i) out << num(f.px(x[i])) << ',' << num(f.py(s.y[i] + s.band[i])) << ' ';
      for (std::size_t i = n; i-- > 0;) out << num(f.px(x[i])) << ',' << num(f.py(s.y[i] - s.band[i])) << ' ';
      out << "\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < n; ++i) out << num(f.px(x[i])) << ',' << num(f.py(s.y[i])) << ' ';
    out << "\"/>\n";
    out << "<rect x=\"" << kLeft + 10 << "\" y=\"" << legend_y - 9 << "\" width=\"12\" height=\"3\" fill=\""
        << s.color << "\"/>\n<text x=\"" << kLeft + 28 << "\" y=\"" << legend_y << "\">" << escape(s.name)
        << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
  return out.str();
}

std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                      const std::vector<double>& values, const std::vector<double>& errors,
                      const std::string& y_label) {
  double top = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    top = std::max(top, values[i] + (i < errors.size() ? errors[i] : 0.0));
  }
  Frame f{0.0, 1.0, 0.0, top > 0.0 ? top * 1.05 : 1.0};
  snap(f.y0, f.y1);
  std::ostringstream out;
  header(out, title);
  axes(out, f, "", y_label, false);
  const double slot = (kWidth - kLeft - kRight) / std::max<std::size_t>(1, values.size());
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = kLeft + slot * (i + 0.2);
    const double y = f.py(values[i]);
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(slot * 0.6)
        << "\" height=\"" << num(f.py(0.0) - y) << "\" fill=\"" << kColors[i % 4] << "\"/>\n";
    if (i < errors.size() && errors[i] > 0.0) {
      const double cx = x + slot * 0.3;
      out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(f.py(values[i] - errors[i])) << "\" x2=\""
          << num(cx) << "\" y2=\"" << num(f.py(values[i] + errors[i])) << "\" stroke=\"black\"/>\n";
    }
    out << "<text x=\"" << num(x + slot * 0.3) << "\" y=\"" << kHeight - kBottom + 16
        << "\" text-anchor=\"middle\">" << escape(labels[i]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace onc::plot
