#include "uwf_cli/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <uwf/errors.hpp>

namespace uwf::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_num(const std::string& s, std::size_t line) {
  if (s.empty()) return kNaN;
  if (s == "nan" || s == "NaN") return kNaN;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError("curves line " + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

std::string esc(const std::string& s) {
  std::string o;
  for (char ch : s) {
    switch (ch) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += ch;
    }
  }
  return o;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

CurveTable parse_curves_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CurveTable t;
  if (!std::getline(in, line)) throw ConfigError("curves file is empty");
  const auto head = split(line);
  if (head.size() < 2) throw ConfigError("curves need an x column and at least one series");
  t.x_label = head[0];
  t.series.assign(head.begin() + 1, head.end());
  t.y.resize(t.series.size());
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != head.size())
      throw ConfigError("curves line " + std::to_string(ln) + ": expected " +
                        std::to_string(head.size()) + " cells");
    const double x = parse_num(cells[0], ln);
    if (!std::isfinite(x)) throw ConfigError("curves line " + std::to_string(ln) + ": missing x");
    t.x.push_back(x);
    for (std::size_t s = 0; s < t.series.size(); ++s) t.y[s].push_back(parse_num(cells[s + 1], ln));
  }
  return t;
}

std::string render_svg(const CurveTable& t, int width, int height) {
  const double ml = 70, mr = 130, mt = 20, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (std::size_t i = 0; i < t.x.size(); ++i)
    for (const auto& ys : t.y)
      if (std::isfinite(ys[i])) {
        x0 = std::min(x0, t.x[i]);
        x1 = std::max(x1, t.x[i]);
        y0 = std::min(y0, ys[i]);
        y1 = std::max(y1, ys[i]);
      }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) {
    const double pad = y0 == 0.0 ? 0.5 : 0.05 * std::abs(y0);
    y0 -= pad;
    y1 += pad;
  }
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return mt + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o.precision(6);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\" data-xmin=\"" << x0 << "\" data-xmax=\""
    << x1 << "\" data-ymin=\"" << y0 << "\" data-ymax=\"" << y1 << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    o << "<line x1=\"" << px(xv) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(xv) << "\" y2=\""
      << mt + ph + 5 << "\" stroke=\"black\"/>";
    o << "<text x=\"" << px(xv) << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">"
      << fmt(xv) << "</text>\n";
    o << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml << "\" y2=\"" << py(yv)
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv)
      << "</text>\n";
  }
  o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
    << esc(t.x_label) << "</text>\n";

  for (std::size_t s = 0; s < t.series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    o << "<polyline class=\"series\" data-name=\"" << esc(t.series[s]) << "\" fill=\"none\" stroke=\""
      << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < t.x.size(); ++i) {
      if (!std::isfinite(t.y[s][i])) continue;
      o << (first ? "" : " ") << px(t.x[i]) << ',' << py(t.y[s][i]);
      first = false;
    }
    o << "\"/>\n";
    const double ly = mt + 14 + 16.0 * static_cast<double>(s);
    o << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + pw + 30
      << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << ml + pw + 35 << "\" y=\"" << ly << "\">" << esc(t.series[s]) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

}  // namespace uwf::cli
