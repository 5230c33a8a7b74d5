#include "adstest/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "adstest/format.hpp"

namespace adstest {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};

const char* colour(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string n2(double v) { return format_number(v, 2); }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Bounds {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  }
};

// World to screen with y flipped and a uniform scale.
struct Frame2D {
  Bounds b;
  double scale = 1.0;
  double margin = 20.0;

  double sx(double x) const { return margin + (x - b.x0) * scale; }
  double sy(double y) const { return margin + (b.y1 - y) * scale; }
};

// Plain line chart frame.
struct Chart {
  double width = 640.0, height = 400.0;
  double left = 60.0, right = 180.0, top = 20.0, bottom = 40.0;
  double xmax = 1.0, ymax = 1.0;

  double px(double x) const { return left + x / xmax * (width - left - right); }
  double py(double y) const { return height - bottom - y / ymax * (height - top - bottom); }
};

void chart_axes(std::ostringstream& o, const Chart& c, const std::string& xlabel, const std::string& ylabel) {
  o << "<line x1=\"" << n2(c.px(0)) << "\" y1=\"" << n2(c.py(0)) << "\" x2=\"" << n2(c.px(c.xmax)) << "\" y2=\""
    << n2(c.py(0)) << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << n2(c.px(0)) << "\" y1=\"" << n2(c.py(0)) << "\" x2=\"" << n2(c.px(0)) << "\" y2=\""
    << n2(c.py(c.ymax)) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = c.xmax * i / 4.0;
    const double yv = c.ymax * i / 4.0;
    o << "<text x=\"" << n2(c.px(xv)) << "\" y=\"" << n2(c.py(0) + 15) << "\" font-size=\"10\" text-anchor=\"middle\">"
      << format_number(xv, xv >= 100 ? 0 : 2) << "</text>\n";
    o << "<text x=\"" << n2(c.px(0) - 5) << "\" y=\"" << n2(c.py(yv) + 3) << "\" font-size=\"10\" text-anchor=\"end\">"
      << format_number(yv, yv >= 100 ? 0 : 2) << "</text>\n";
  }
  o << "<text x=\"" << n2((c.px(0) + c.px(c.xmax)) / 2) << "\" y=\"" << n2(c.height - 5)
    << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
  o << "<text x=\"12\" y=\"" << n2((c.py(0) + c.py(c.ymax)) / 2) << "\" font-size=\"12\" text-anchor=\"middle\" "
    << "transform=\"rotate(-90 12 " << n2((c.py(0) + c.py(c.ymax)) / 2) << ")\">" << escape(ylabel) << "</text>\n";
}

void legend_entry(std::ostringstream& o, const Chart& c, std::size_t i, const std::string& text) {
  const double x = c.width - c.right + 10;
  const double y = c.top + 15 + 18.0 * static_cast<double>(i);
  o << "<line x1=\"" << n2(x) << "\" y1=\"" << n2(y - 4) << "\" x2=\"" << n2(x + 18) << "\" y2=\"" << n2(y - 4)
    << "\" stroke=\"" << colour(i) << "\" stroke-width=\"2\"/>\n";
  o << "<text x=\"" << n2(x + 22) << "\" y=\"" << n2(y) << "\" font-size=\"11\">" << escape(text) << "</text>\n";
}

std::string svg_open(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + n2(w) +
         "\" height=\"" + n2(h) + "\" viewBox=\"0 0 " + n2(w) + " " + n2(h) + "\">\n<rect width=\"100%\" " +
         "height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string_view to_string(RenderKind k) {
  switch (k) {
    case RenderKind::kTrajectories:
      return "trajectories";
    case RenderKind::kCoverage:
      return "coverage";
    case RenderKind::kGrowth:
      return "growth";
  }
  return "?";
}

RenderKind parse_render_kind(std::string_view text) {
  for (auto k : {RenderKind::kTrajectories, RenderKind::kCoverage, RenderKind::kGrowth}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown render kind '" + std::string(text) + "'");
}

std::string render_trajectories_svg(const RouteSpec& route, const std::vector<TrajectoryRecord>& failures) {
  std::vector<std::array<double, 2>> left, right;
  for (const auto& p : route.centerline) {
    const double nx = -std::sin(p.heading), ny = std::cos(p.heading);
    left.push_back({p.x + nx * route.lane_half_width, p.y + ny * route.lane_half_width});
    right.push_back({p.x - nx * route.lane_half_width, p.y - ny * route.lane_half_width});
  }

  Frame2D f;
  for (const auto& q : left) f.b.add(q[0], q[1]);
  for (const auto& q : right) f.b.add(q[0], q[1]);
  for (const auto& o : route.obstacles) {
    const double r = std::hypot(o.length, o.width) / 2;
    f.b.add(o.cx - r, o.cy - r);
    f.b.add(o.cx + r, o.cy + r);
  }
  f.b.add(route.ev_start.x, route.ev_start.y);
  for (const auto& t : failures) {
    for (const auto& q : t.vif) f.b.add(q[0], q[1]);
  }
  if (!std::isfinite(f.b.x0)) f.b = Bounds{0, 0, 1, 1};
  const double span = std::max({f.b.x1 - f.b.x0, f.b.y1 - f.b.y0, 1.0});
  f.scale = 600.0 / span;
  const double w = (f.b.x1 - f.b.x0) * f.scale + 2 * f.margin;
  const double h = (f.b.y1 - f.b.y0) * f.scale + 2 * f.margin;

  std::ostringstream o;
  o << svg_open(w, h);
  for (const auto* side : {&left, &right}) {
    std::string d;
    for (std::size_t i = 0; i < side->size(); ++i) {
      d += (i ? " L " : "M ") + n2(f.sx((*side)[i][0])) + " " + n2(f.sy((*side)[i][1]));
    }
    o << "<path class=\"lane\" d=\"" << d << "\" fill=\"none\" stroke=\"#555\" stroke-width=\"1.5\"/>\n";
  }
  for (const auto& ob : route.obstacles) {
    const double deg = -ob.heading * 180.0 / M_PI;
    o << "<rect class=\"obstacle\" x=\"" << n2(f.sx(ob.cx) - ob.length * f.scale / 2) << "\" y=\""
      << n2(f.sy(ob.cy) - ob.width * f.scale / 2) << "\" width=\"" << n2(ob.length * f.scale) << "\" height=\""
      << n2(ob.width * f.scale) << "\" transform=\"rotate(" << n2(deg) << " " << n2(f.sx(ob.cx)) << " "
      << n2(f.sy(ob.cy)) << ")\" fill=\"#999\"/>\n";
  }
  o << "<circle class=\"ev-start\" cx=\"" << n2(f.sx(route.ev_start.x)) << "\" cy=\"" << n2(f.sy(route.ev_start.y))
    << "\" r=\"5\" fill=\"#2ca02c\"/>\n";
  for (std::size_t i = 0; i < failures.size(); ++i) {
    std::string pts;
    for (std::size_t k = 0; k < failures[i].vif.size(); ++k) {
      if (k) pts += " ";
      pts += n2(f.sx(failures[i].vif[k][0])) + "," + n2(f.sy(failures[i].vif[k][1]));
    }
    o << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << colour(i)
      << "\" stroke-opacity=\"0.6\" stroke-width=\"1\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<BandPoint> coverage_band(const LoadedCampaign& campaign) {
  std::vector<std::vector<double>> series;
  for (const auto& r : campaign.repetitions) series.push_back(efficiency_series(r, campaign.config.mode));
  std::vector<BandPoint> band;
  if (series.empty()) return band;
  std::size_t len = series.front().size();
  for (const auto& s : series) len = std::min(len, s.size());
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<double> col;
    for (const auto& s : series) col.push_back(s[i]);
    const Summary m = summarize(col);
    band.push_back({static_cast<double>(campaign.repetitions.front().timeline[i].step), m.mean, m.sem.value_or(0.0)});
  }
  return band;
}

std::string render_coverage_svg(const std::vector<LoadedCampaign>& campaigns) {
  Chart c;
  std::vector<std::vector<BandPoint>> bands;
  bool extension = false;
  for (const auto& cp : campaigns) {
    bands.push_back(coverage_band(cp));
    extension = extension || cp.config.mode == CampaignMode::kExtension;
    for (const auto& p : bands.back()) {
      c.xmax = std::max(c.xmax, p.x);
      c.ymax = std::max(c.ymax, p.mean + p.sem);
    }
  }
  std::ostringstream o;
  o << svg_open(c.width, c.height);
  chart_axes(o, c, "steps", extension ? "violations" : "coverage");
  for (std::size_t j = 0; j < bands.size(); ++j) {
    const auto& b = bands[j];
    if (b.empty()) continue;
    std::string pts;
    for (const auto& p : b) pts += n2(c.px(p.x)) + "," + n2(c.py(p.mean + p.sem)) + " ";
    for (auto it = b.rbegin(); it != b.rend(); ++it) pts += n2(c.px(it->x)) + "," + n2(c.py(it->mean - it->sem)) + " ";
    pts.pop_back();
    o << "<polygon class=\"sem-band\" points=\"" << pts << "\" fill=\"" << colour(j)
      << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    std::string d;
    for (std::size_t i = 0; i < b.size(); ++i) d += (i ? " L " : "M ") + n2(c.px(b[i].x)) + " " + n2(c.py(b[i].mean));
    o << "<path class=\"mean\" d=\"" << d << "\" fill=\"none\" stroke=\"" << colour(j) << "\" stroke-width=\"2\"/>\n";
    legend_entry(o, c, j, campaigns[j].label());
  }
  o << "</svg>\n";
  return o.str();
}

double growth_ratio(const LoadedCampaign& campaign) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : campaign.repetitions) {
    if (r.growth.empty() || r.growth.back().step <= 0) continue;
    sum += static_cast<double>(r.growth.back().distinct_states) / static_cast<double>(r.growth.back().step);
    ++n;
  }
  return n ? sum / n : 0.0;
}

std::string render_growth_svg(const std::vector<LoadedCampaign>& campaigns) {
  Chart c;
  std::vector<std::vector<std::array<double, 2>>> lines;
  for (const auto& cp : campaigns) {
    auto& line = lines.emplace_back();
    if (cp.repetitions.empty()) continue;
    std::size_t len = cp.repetitions.front().growth.size();
    for (const auto& r : cp.repetitions) len = std::min(len, r.growth.size());
    for (std::size_t i = 0; i < len; ++i) {
      double mean = 0.0;
      for (const auto& r : cp.repetitions) mean += static_cast<double>(r.growth[i].distinct_states);
      mean /= static_cast<double>(cp.repetitions.size());
      const double x = static_cast<double>(cp.repetitions.front().growth[i].step);
      line.push_back({x, mean});
      c.xmax = std::max(c.xmax, x);
      c.ymax = std::max(c.ymax, mean);
    }
  }
  std::ostringstream o;
  o << svg_open(c.width, c.height);
  chart_axes(o, c, "steps", "distinct states");
  for (std::size_t j = 0; j < lines.size(); ++j) {
    std::string d;
    for (std::size_t i = 0; i < lines[j].size(); ++i) {
      d += (i ? " L " : "M ") + n2(c.px(lines[j][i][0])) + " " + n2(c.py(lines[j][i][1]));
    }
    if (!d.empty()) {
      o << "<path class=\"growth\" d=\"" << d << "\" fill=\"none\" stroke=\"" << colour(j)
        << "\" stroke-width=\"2\"/>\n";
    }
    legend_entry(o, c, j, campaigns[j].label() + " ratio=" + format_number(growth_ratio(campaigns[j]), 3));
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace adstest
