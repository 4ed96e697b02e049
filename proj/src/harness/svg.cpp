#include "prl/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace prl::harness::svg {

namespace {

constexpr double W = 720, H = 420, L = 70, R = 200, T = 40, B = 60;
const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                         "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

void frame(std::ostringstream& os, const std::string& title, const std::string& xl, const std::string& yl,
           const Range& xr, const Range& yr) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title) << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fy = i / 4.0;
    const double y = H - B - fy * (H - B - T);
    os << "<text x=\"" << L - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick(yr.lo + fy * (yr.hi - yr.lo)) << "</text>\n";
    if (xr.hi > xr.lo) {
      const double x = L + fy * (W - L - R);
      os << "<text x=\"" << num(x) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << tick(xr.lo + fy * (xr.hi - xr.lo)) << "</text>\n";
    }
  }
  os << "<text x=\"" << L + (W - L - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
  os << "<text x=\"16\" y=\"" << T + (H - B - T) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << T + (H - B - T) / 2 << ")\">" << escape(yl) << "</text>\n";
}

}  // namespace

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

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.finish();
  yr.finish();
  std::ostringstream os;
  frame(os, title, x_label, y_label, xr, yr);
  auto px = [&](double x) { return L + (x - xr.lo) / (xr.hi - xr.lo) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - yr.lo) / (yr.hi - yr.lo) * (H - B - T); };
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = palette[k % 10];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) os << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    os << "\"/>\n";
    const double ly = T + 14 + 16 * static_cast<double>(k);
    os << "<rect x=\"" << W - R + 10 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << colour << "\"/>\n";
    os << "<text x=\"" << W - R + 24 << "\" y=\"" << ly << "\" font-size=\"10\">" << escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string bar_chart(const std::string& title, const std::string& y_label, const std::vector<Bar>& bars) {
  Range yr;
  yr.add(0.0);
  for (const auto& b : bars) {
    yr.add(b.value);
    yr.add(b.low);
    yr.add(b.high);
  }
  yr.finish();
  std::ostringstream os;
  frame(os, title, "", y_label, Range{}, yr);
  auto py = [&](double y) { return H - B - (y - yr.lo) / (yr.hi - yr.lo) * (H - B - T); };
  const double slot = (W - L - R) / std::max<double>(1.0, static_cast<double>(bars.size()));
  for (std::size_t k = 0; k < bars.size(); ++k) {
    const auto& b = bars[k];
    const double x0 = L + slot * static_cast<double>(k) + slot * 0.15;
    const double bw = slot * 0.7;
    const double y0 = py(0.0);
    const double y1 = py(std::isfinite(b.value) ? b.value : 0.0);
    os << "<rect x=\"" << num(x0) << "\" y=\"" << num(std::min(y0, y1)) << "\" width=\"" << num(bw) << "\" height=\""
       << num(std::abs(y1 - y0)) << "\" fill=\"" << palette[k % 10] << "\"/>\n";
    if (std::isfinite(b.low) && std::isfinite(b.high)) {
      const double cx = x0 + bw / 2;
      os << "<line x1=\"" << num(cx) << "\" y1=\"" << num(py(b.low)) << "\" x2=\"" << num(cx) << "\" y2=\"" << num(py(b.high)) << "\" stroke=\"black\"/>\n";
      os << "<line x1=\"" << num(cx - 5) << "\" y1=\"" << num(py(b.low)) << "\" x2=\"" << num(cx + 5) << "\" y2=\"" << num(py(b.low)) << "\" stroke=\"black\"/>\n";
      os << "<line x1=\"" << num(cx - 5) << "\" y1=\"" << num(py(b.high)) << "\" x2=\"" << num(cx + 5) << "\" y2=\"" << num(py(b.high)) << "\" stroke=\"black\"/>\n";
    }
    const double ly = T + 14 + 16 * static_cast<double>(k);
    os << "<rect x=\"" << W - R + 10 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << palette[k % 10] << "\"/>\n";
    os << "<text x=\"" << W - R + 24 << "\" y=\"" << ly << "\" font-size=\"9\">" << escape(b.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap(const std::string& title, const Matrix& m, double lo, double hi) {
  const double size = 360.0;
  const double cell = m.rows() ? size / static_cast<double>(std::max(m.rows(), m.cols())) : size;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 40 << "\" height=\"" << size + 60 << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << (size + 40) / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      double t = 0.0;
      if (std::isfinite(v)) t = v >= 0.0 ? std::min(1.0, v / hi) : -std::min(1.0, v / lo);
      int r = 255, g = 255, b = 255;
      if (t > 0) {
        r = g = static_cast<int>(255 * (1 - t));
      } else {
        g = b = static_cast<int>(255 * (1 + t));
      }
      char colour[16];
      std::snprintf(colour, sizeof colour, "#%02x%02x%02x", r, g, b);
      os << "<rect x=\"" << num(20 + cell * static_cast<double>(j)) << "\" y=\"" << num(40 + cell * static_cast<double>(i))
         << "\" width=\"" << num(cell) << "\" height=\"" << num(cell) << "\" fill=\"" << colour << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace prl::harness::svg
