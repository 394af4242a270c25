#include "netrmab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace netrmab::svg {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 440;
constexpr double kLeft = 80;
constexpr double kRight = 170;
constexpr double kTop = 40;
constexpr double kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
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
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!(lo <= hi)) {
      lo = 0;
      hi = 1;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        "font-size=\"15\">"
     << escape(title) << "</text>\n";
}

void axes(std::ostringstream& os, const Range& y, const std::string& x_label,
          const std::string& y_label) {
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1
     << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0
     << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = y.lo + (y.hi - y.lo) * k / 4.0;
    const double py = y0 - (y0 - y1) * k / 4.0;
    os << "<line x1=\"" << x0 - 4 << "\" y1=\"" << num(py) << "\" x2=\"" << x0
       << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << x0 - 8 << "\" y=\"" << num(py + 4)
       << "\" text-anchor=\"end\">" << tick(std::round(v * 100) / 100)
       << "</text>\n";
  }
  os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 15
     << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n"
     << "<text x=\"18\" y=\"" << (y0 + y1) / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << (y0 + y1) / 2
     << ")\">" << escape(y_label) << "</text>\n";
}

void legend(std::ostringstream& os, const std::vector<std::string>& labels) {
  const double x = kWidth - kRight + 20;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + 10 + 20.0 * static_cast<double>(i);
    os << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"12\" "
       << "height=\"12\" fill=\"" << kPalette[i % 8] << "\"/>\n"
       << "<text x=\"" << x + 18 << "\" y=\"" << y + 1 << "\">"
       << escape(labels[i]) << "</text>\n";
  }
}

}  // namespace

std::string render(const LineChart& chart) {
  Range xr;
  Range yr;
  for (const auto& s : chart.series) {
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      xr.add(s.x[i]);
      const double e = i < s.err.size() ? s.err[i] : 0.0;
      yr.add(s.y[i] - e);
      yr.add(s.y[i] + e);
    }
  }
  xr.settle();
  yr.settle();
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  auto px = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
  auto py = [&](double v) { return y0 - (v - yr.lo) / (yr.hi - yr.lo) * (y0 - y1); };

  std::ostringstream os;
  header(os, chart.title);
  axes(os, yr, chart.x_label, chart.y_label);

  std::vector<double> xs;
  for (const auto& s : chart.series) xs.insert(xs.end(), s.x.begin(), s.x.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double v : xs) {
    os << "<text x=\"" << num(px(v)) << "\" y=\"" << y0 + 18
       << "\" text-anchor=\"middle\">" << tick(v) << "</text>\n";
  }

  std::vector<std::string> labels;
  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = kPalette[k % 8];
    labels.push_back(s.label);
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      os << (i ? " " : "") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      const double e = i < s.err.size() ? s.err[i] : 0.0;
      if (e > 0) {
        os << "<line x1=\"" << num(px(s.x[i])) << "\" y1=\"" << num(py(s.y[i] - e))
           << "\" x2=\"" << num(px(s.x[i])) << "\" y2=\"" << num(py(s.y[i] + e))
           << "\" stroke=\"" << color << "\"/>\n";
      }
      os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
         << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
  }
  legend(os, labels);
  os << "</svg>\n";
  return os.str();
}

std::string render(const BarChart& chart) {
  Range yr;
  yr.add(0.0);
  for (std::size_t g = 0; g < chart.values.size(); ++g) {
    for (std::size_t k = 0; k < chart.values[g].size(); ++k) {
      const double e = g < chart.errors.size() && k < chart.errors[g].size()
                           ? chart.errors[g][k]
                           : 0.0;
      yr.add(chart.values[g][k] + e);
      yr.add(chart.values[g][k] - e);
    }
  }
  yr.settle();
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  auto py = [&](double v) { return y0 - (v - yr.lo) / (yr.hi - yr.lo) * (y0 - y1); };

  std::ostringstream os;
  header(os, chart.title);
  axes(os, yr, "", chart.y_label);
  const double group_w = (x1 - x0) / static_cast<double>(std::max<std::size_t>(chart.groups.size(), 1));
  const double bar_w = 0.8 * group_w / static_cast<double>(std::max<std::size_t>(chart.labels.size(), 1));
  for (std::size_t g = 0; g < chart.groups.size(); ++g) {
    const double gx = x0 + group_w * static_cast<double>(g) + 0.1 * group_w;
    os << "<text x=\"" << num(x0 + group_w * (static_cast<double>(g) + 0.5)) << "\" y=\""
       << y0 + 18 << "\" text-anchor=\"middle\">" << escape(chart.groups[g])
       << "</text>\n";
    for (std::size_t k = 0; k < chart.labels.size() && k < chart.values[g].size(); ++k) {
      const double v = chart.values[g][k];
      const double bx = gx + bar_w * static_cast<double>(k);
      const double top = py(std::max(v, 0.0));
      const double base = py(std::min(v, 0.0));
      os << "<rect x=\"" << num(bx) << "\" y=\"" << num(top) << "\" width=\""
         << num(bar_w * 0.9) << "\" height=\"" << num(base - top) << "\" fill=\""
         << kPalette[k % 8] << "\"/>\n";
      const double e = g < chart.errors.size() && k < chart.errors[g].size()
                           ? chart.errors[g][k]
                           : 0.0;
      if (e > 0) {
        const double cx = bx + bar_w * 0.45;
        os << "<line x1=\"" << num(cx) << "\" y1=\"" << num(py(v - e)) << "\" x2=\""
           << num(cx) << "\" y2=\"" << num(py(v + e)) << "\" stroke=\"black\"/>\n";
      }
    }
  }
  legend(os, chart.labels);
  os << "</svg>\n";
  return os.str();
}

}  // namespace netrmab::svg
