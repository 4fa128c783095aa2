#include "drm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace drm::svg {
namespace {

constexpr double kW = 720, kH = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double lo, hi;
  double y(double v) const { return kTop + (kH - kTop - kBottom) * (1.0 - (v - lo) / (hi - lo)); }
};

Frame frame(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

void header(std::ostream& os, const std::string& title, const Frame& f) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(title) << "</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\""
     << kH - kBottom << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = f.lo + (f.hi - f.lo) * t / 4.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.y(v) + 4 << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return i + 1 < sorted.size() ? sorted[i] * (1 - frac) + sorted[i + 1] * frac : sorted[i];
}

}  // namespace

void boxplot(std::ostream& os, const std::string& title, const std::vector<std::string>& labels,
             const std::vector<std::vector<double>>& groups) {
  std::vector<std::vector<double>> clean;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& g : groups) {
    std::vector<double> v;
    for (double x : g)
      if (std::isfinite(x)) v.push_back(x);
    std::sort(v.begin(), v.end());
    if (!v.empty()) {
      lo = std::min(lo, v.front());
      hi = std::max(hi, v.back());
    }
    clean.push_back(std::move(v));
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  const Frame f = frame(lo, hi);
  header(os, title, f);
  const double slot = (kW - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(1, clean.size()));
  for (std::size_t g = 0; g < clean.size(); ++g) {
    const double cx = kLeft + slot * (static_cast<double>(g) + 0.5);
    const double half = std::min(30.0, slot * 0.3);
    const auto& v = clean[g];
    if (!v.empty()) {
      const double q1 = quantile(v, 0.25), q2 = quantile(v, 0.5), q3 = quantile(v, 0.75);
      os << "<line x1=\"" << cx << "\" y1=\"" << f.y(v.front()) << "\" x2=\"" << cx << "\" y2=\"" << f.y(v.back())
         << "\" stroke=\"black\"/>\n";
      os << "<rect x=\"" << cx - half << "\" y=\"" << f.y(q3) << "\" width=\"" << 2 * half << "\" height=\""
         << f.y(q1) - f.y(q3) << "\" fill=\"" << kColors[g % 7] << "\" fill-opacity=\"0.5\" stroke=\"black\"/>\n";
      os << "<line x1=\"" << cx - half << "\" y1=\"" << f.y(q2) << "\" x2=\"" << cx + half << "\" y2=\"" << f.y(q2)
         << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    os << "<text x=\"" << cx << "\" y=\"" << kH - kBottom + 18 << "\" text-anchor=\"middle\">"
       << esc(g < labels.size() ? labels[g] : "") << "</text>\n";
  }
  os << "</svg>\n";
}

void line_chart(std::ostream& os, const std::string& title, const std::vector<Series>& series) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  double xlo = lo, xhi = -lo;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.y.size() && i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      lo = std::min(lo, s.y[i]);
      hi = std::max(hi, s.y[i]);
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
    }
  if (!std::isfinite(lo)) lo = 0, hi = 1, xlo = 0, xhi = 1;
  if (!(xhi > xlo)) xhi = xlo + 1;
  const Frame f = frame(lo, hi);
  header(os, title, f);
  auto px = [&](double x) { return kLeft + (kW - kLeft - kRight) * (x - xlo) / (xhi - xlo); };
  os << "<text x=\"" << kLeft << "\" y=\"" << kH - kBottom + 18 << "\">" << num(xlo) << "</text>\n";
  os << "<text x=\"" << kW - kRight << "\" y=\"" << kH - kBottom + 18 << "\" text-anchor=\"end\">" << num(xhi)
     << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    os << "<polyline fill=\"none\" stroke=\"" << kColors[k % 7] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.y.size() && i < s.x.size(); ++i)
      if (std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << f.y(s.y[i]) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << kW - kRight - 150 << "\" y=\"" << kTop + 16 * (k + 1) << "\" fill=\"" << kColors[k % 7]
       << "\">" << esc(s.label) << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace drm::svg
