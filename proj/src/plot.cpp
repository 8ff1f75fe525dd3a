#include "edgerec/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "edgerec/harness.hpp"

namespace edgerec {

namespace {

struct CurvePoint {
  double episode;
  double mean;
  double std_dev;
};

struct Curve {
  double level;
  std::vector<CurvePoint> points;
};

double parse_cell(std::string_view cell, std::size_t line_no) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw std::runtime_error("aggregate CSV line " + std::to_string(line_no) +
                             ": bad number '" + std::string(cell) + "'");
  return v;
}

std::vector<Curve> parse_aggregate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open aggregate CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("aggregate CSV '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "level,episode,mean_smoothed,std_smoothed")
    throw std::runtime_error("aggregate CSV '" + path + "': unexpected header '" + line + "'");

  std::vector<Curve> curves;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view view = line;
    while (true) {
      const std::size_t comma = view.find(',');
      cells.push_back(view.substr(0, comma));
      if (comma == std::string_view::npos) break;
      view.remove_prefix(comma + 1);
    }
    if (cells.size() != 4)
      throw std::runtime_error("aggregate CSV line " + std::to_string(line_no) +
                               ": expected 4 columns, got " + std::to_string(cells.size()));
    const double level = parse_cell(cells[0], line_no);
    if (curves.empty() || curves.back().level != level) {
      const auto again = std::find_if(curves.begin(), curves.end(),
                                      [&](const Curve& c) { return c.level == level; });
      if (again != curves.end())
        throw std::runtime_error("aggregate CSV '" + path +
                                 "': rows for one level must be contiguous");
      curves.push_back(Curve{level, {}});
    }
    curves.back().points.push_back(CurvePoint{parse_cell(cells[1], line_no),
                                              parse_cell(cells[2], line_no),
                                              parse_cell(cells[3], line_no)});
  }
  if (curves.empty())
    throw std::runtime_error("aggregate CSV '" + path + "' has no data rows");
  return curves;
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Axis {
  double lo, hi;
  double to_px(double v, double px_lo, double px_hi) const {
    const double range = hi - lo;
    const double frac = range == 0.0 ? 0.5 : (v - lo) / range;
    return px_lo + frac * (px_hi - px_lo);
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

void emit_plot(const std::string& aggregate_csv_path, const std::string& svg_path) {
  const std::vector<Curve> curves = parse_aggregate(aggregate_csv_path);

  const double width = 880, height = 560;
  const double left = 80, right = width - 30, top = 40, bottom = height - 70;

  Axis x{0, 1}, y{0, 1};
  x.lo = x.hi = curves[0].points[0].episode;
  y.lo = y.hi = curves[0].points[0].mean;
  for (const Curve& c : curves)
    for (const CurvePoint& p : c.points) {
      x.lo = std::min(x.lo, p.episode);
      x.hi = std::max(x.hi, p.episode);
      y.lo = std::min(y.lo, p.mean - p.std_dev);
      y.hi = std::max(y.hi, p.mean + p.std_dev);
    }
  const double pad = (y.hi - y.lo) * 0.05;
  y.lo -= pad == 0.0 ? 1.0 : pad;
  y.hi += pad == 0.0 ? 1.0 : pad;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  // Grid and tick labels.
  const int n_ticks = 5;
  svg << "<g font-family=\"sans-serif\" font-size=\"13\" fill=\"#333\">\n";
  for (int i = 0; i <= n_ticks; ++i) {
    const double fx = x.lo + (x.hi - x.lo) * i / n_ticks;
    const double px = x.to_px(fx, left, right);
    svg << "<line x1=\"" << px << "\" y1=\"" << top << "\" x2=\"" << px << "\" y2=\""
        << bottom << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << px << "\" y=\"" << bottom + 20
        << "\" text-anchor=\"middle\">" << fmt(fx) << "</text>\n";
    const double fy = y.lo + (y.hi - y.lo) * i / n_ticks;
    const double py = y.to_px(fy, bottom, top);
    svg << "<line x1=\"" << left << "\" y1=\"" << py << "\" x2=\"" << right << "\" y2=\""
        << py << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\">" << fmt(fy) << "</text>\n";
  }
  svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 18
      << "\" text-anchor=\"middle\">episodes</text>\n";
  svg << "<text x=\"22\" y=\"" << (top + bottom) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 22 " << (top + bottom) / 2
      << ")\">return</text>\n";
  svg << "</g>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left
      << "\" height=\"" << bottom - top << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const Curve& curve = curves[ci];
    const char* color = kPalette[ci % (sizeof(kPalette) / sizeof(kPalette[0]))];
    const std::size_t stride = std::max<std::size_t>(1, curve.points.size() / 800);

    std::vector<const CurvePoint*> pts;
    for (std::size_t i = 0; i < curve.points.size(); i += stride)
      pts.push_back(&curve.points[i]);
    if (pts.back() != &curve.points.back()) pts.push_back(&curve.points.back());

    // +-1 std-dev band.
    svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
    for (const CurvePoint* p : pts)
      svg << fmt(x.to_px(p->episode, left, right)) << ','
          << fmt(y.to_px(p->mean + p->std_dev, bottom, top)) << ' ';
    for (auto it = pts.rbegin(); it != pts.rend(); ++it)
      svg << fmt(x.to_px((*it)->episode, left, right)) << ','
          << fmt(y.to_px((*it)->mean - (*it)->std_dev, bottom, top)) << ' ';
    svg << "\"/>\n";

    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (const CurvePoint* p : pts)
      svg << fmt(x.to_px(p->episode, left, right)) << ','
          << fmt(y.to_px(p->mean, bottom, top)) << ' ';
    svg << "\"/>\n";

    // Legend entry.
    const double ly = top + 18 + 20 * static_cast<double>(ci);
    svg << "<line x1=\"" << left + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + 40
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + 48 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#333\">p = "
        << format_double(curve.level) << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open plot output '" + svg_path + "'");
  out << svg.str();
  if (!out) throw std::runtime_error("failed writing plot '" + svg_path + "'");
}

}  // namespace edgerec
