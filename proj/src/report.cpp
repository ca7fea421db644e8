#include "medlab/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace medlab {

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Json to_json(const std::vector<Vec>& points) {
  Json a = Json::array();
  for (const auto& p : points) a.push_back(to_json(p));
  return a;
}

Vec vec_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error(Errc::invalid_config, "expected a non-empty number array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(Errc::invalid_config, "expected a number array");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json to_json(const Thresholds& thr) {
  return Json{{"epsilon", num(thr.epsilon)}, {"lambda", num(thr.lambda)}, {"coherence", num(thr.coherence)}};
}

Json to_json(const GridSpec& grid) {
  Json j{{"box", {{"lo", to_json(grid.box.lo)}, {"hi", to_json(grid.box.hi)}}}, {"resolution", grid.resolution}};
  if (grid.mask_center) j["mask"] = {{"center", to_json(*grid.mask_center)}, {"radius", num(grid.mask_radius)}};
  return j;
}

Json to_json(const MedialSample& s) {
  Json j{{"location", to_json(s.location)},
         {"spread", num(s.spread)},
         {"witness_a", to_json(s.witness_a)},
         {"witness_b", to_json(s.witness_b)},
         {"method", std::string(to_string(s.method))}};
  if (s.method == MedialMethod::jump_bisection) {
    j["bracket"] = num(s.bracket);
    j["iterations"] = s.iterations;
  }
  return j;
}

Json to_json(const MedialScanReport& r) {
  Json samples = Json::array();
  for (const auto& s : r.samples) samples.push_back(to_json(s));
  std::size_t active = 0;
  for (double s : r.node_spread) active += !std::isnan(s);
  Json probes = Json::object();
  for (const auto& [name, d] : r.min_distance_to) probes[name] = num(d);
  return Json{{"grid", to_json(r.grid)},
              {"thresholds", to_json(r.thresholds)},
              {"fill_distance", num(r.fill_distance)},
              {"node_count", active},
              {"flagged", r.flagged()},
              {"samples", samples},
              {"min_distance_to", probes},
              {"warnings", r.warnings}};
}

Json to_json(const PathEstimate& p) {
  return Json{{"kind", std::string(to_string(p.kind))},
              {"length", num(p.length)},
              {"endpoints", {to_json(p.endpoints[0]), to_json(p.endpoints[1])}},
              {"steps", p.steps},
              {"vertex_count", p.vertices.size()}};
}

Json to_json(const ProbeRegion& r) {
  Json j{{"center", to_json(r.center)}, {"radius", num(r.radius)}};
  if (r.inner_radius > 0.0) j["inner_radius"] = num(r.inner_radius);
  if (r.axis) j["axis"] = to_json(*r.axis);
  j["delta"] = num(r.delta);
  j["sup_dist"] = num(r.sup_dist);
  return j;
}

Json to_json(const RegionCertificate& c) {
  return Json{{"grid", to_json(c.scan.grid)},
              {"flagged_nodes", c.scan.flagged()},
              {"jump_edges_bisected", c.jump_edges},
              {"jump_points", c.jump_points.size()},
              {"min_medial_distance", num(c.min_medial_distance)},
              {"grid_step", num(c.scan.grid.max_step())}};
}

Json to_json(const LipschitzReport& r) {
  return Json{{"region", to_json(r.region)},
              {"empirical_quotient", num(r.empirical_quotient)},
              {"paper_bound", num(r.paper_bound)},
              {"pair_count", r.pair_count},
              {"on_set_quotient", num(r.on_set_quotient)},
              {"min_pair_distance", num(r.min_pair_distance)},
              {"worst_pair", {to_json(r.worst_p), to_json(r.worst_q)}},
              {"thresholds", to_json(r.thresholds)},
              {"fill_distance", num(r.fill_distance)},
              {"seed", r.seed}};
}

Json to_json(const OnSetReport& r) {
  return Json{{"pair_count", r.pair_count},
              {"max_quotient", num(r.max_quotient)},
              {"min_pair_distance", num(r.min_pair_distance)},
              {"worst_pair", {to_json(r.worst_p), to_json(r.worst_q)}},
              {"seed", r.seed}};
}

Json to_json(const LocalLneSample& s) {
  return Json{{"radius", num(s.radius)},  {"constant", num(s.constant)},   {"sources", s.sources},
              {"targets", s.targets},      {"witness_a", to_json(s.witness_a)}, {"witness_b", to_json(s.witness_b)},
              {"inner", num(s.inner)},     {"outer", num(s.outer)}};
}

Json to_json(const LneReport& r) {
  Json constants = Json::array();
  for (double c : r.constants) constants.push_back(num(c));
  Json samples = Json::array();
  for (const auto& s : r.samples) samples.push_back(to_json(s));
  Json j{{"point", to_json(r.point)},
         {"radii", r.radii},
         {"constants", constants},
         {"verdict", std::string(to_string(r.verdict))},
         {"samples", samples}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json to_json(const BallScan& b) {
  return Json{{"radius", num(b.radius)},         {"flagged", b.flagged}, {"nearest_medial", num(b.nearest_medial)},
              {"paths_tried", b.paths_tried},     {"paths_ok", b.paths_ok}, {"longest_path", num(b.longest_path)}};
}

Json to_json(const TheoremVerdict& v) {
  Json balls = Json::array();
  for (const auto& b : v.balls) balls.push_back(to_json(b));
  return Json{{"point", to_json(v.point)},
              {"lne_verdict", std::string(to_string(v.lne.verdict))},
              {"medial_approach", v.medial_approach},
              {"rectifiable", v.rectifiable},
              {"consistent", v.consistent},
              {"lne", to_json(v.lne)},
              {"balls", balls}};
}

Json to_json(const ConjectureTrace& t) {
  Json pairs = Json::array();
  for (const auto& [a, b] : t.witness_pairs) pairs.push_back({to_json(a), to_json(b)});
  auto nums = [](const std::vector<double>& xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(num(x));
    return a;
  };
  return Json{{"point", to_json(t.point)},
              {"medial_points", to_json(t.medial_points)},
              {"witness_pairs", pairs},
              {"inner", nums(t.inner)},
              {"outer", nums(t.outer)},
              {"ratios", nums(t.ratios)},
              {"skipped", t.skipped},
              {"diverges", t.diverges},
              {"vacuous", t.vacuous}};
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

bool SliceSpec::keeps(const Vec& x) const {
  if (!normal) return true;
  return std::abs(x[*normal] - value) <= thickness;
}

SliceSpec SliceSpec::for_dim(std::size_t dim) {
  SliceSpec s;
  if (dim > 2) {
    s.normal = 2;
  }
  return s;
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string color_for(double t) {
  // Viridis anchors.
  static constexpr std::array<std::array<double, 3>, 5> kStops = {{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0) * (kStops.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(t), kStops.size() - 2);
  const double f = t - static_cast<double>(i);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(kStops[i][0] + f * (kStops[i + 1][0] - kStops[i][0]))),
                static_cast<int>(std::lround(kStops[i][1] + f * (kStops[i + 1][1] - kStops[i][1]))),
                static_cast<int>(std::lround(kStops[i][2] + f * (kStops[i + 1][2] - kStops[i][2]))));
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::optional<std::string> emit_svg(std::ostream& out, const PlotData& data, const SliceSpec& slice) {
  const auto u = slice.axis_u;
  const auto v = slice.axis_v;
  std::vector<std::array<double, 2>> samples;
  for (const auto& p : data.samples) {
    if (slice.keeps(p)) samples.push_back({p[u], p[v]});
  }
  std::vector<std::pair<std::array<double, 2>, double>> medial;
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  for (const auto& m : data.medial) {
    if (!slice.keeps(m.location)) continue;
    medial.push_back({{m.location[u], m.location[v]}, m.value});
    vmin = std::min(vmin, m.value);
    vmax = std::max(vmax, m.value);
  }
  std::optional<std::string> warning;
  if (samples.empty() && medial.empty()) warning = "slice plane misses all data";

  double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  double hi[2] = {-lo[0], -lo[1]};
  auto grow = [&](double x, double y) {
    lo[0] = std::min(lo[0], x);
    hi[0] = std::max(hi[0], x);
    lo[1] = std::min(lo[1], y);
    hi[1] = std::max(hi[1], y);
  };
  for (const auto& p : samples) grow(p[0], p[1]);
  for (const auto& [p, val] : medial) grow(p[0], p[1]);
  for (const auto& path : data.paths) {
    for (const auto& x : path.vertices) grow(x[u], x[v]);
  }
  for (const auto& x : data.markers) grow(x[u], x[v]);
  if (!(lo[0] <= hi[0])) {
    lo[0] = lo[1] = -1.0;
    hi[0] = hi[1] = 1.0;
  }
  // Equal scale on both axes around the data centre.
  const double span = std::max({hi[0] - lo[0], hi[1] - lo[1], 1e-12}) * 1.08;
  const double cx = 0.5 * (lo[0] + hi[0]);
  const double cy = 0.5 * (lo[1] + hi[1]);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const double scale = std::min(pw, ph) / span;
  const double x0 = cx - 0.5 * pw / scale;
  const double y0 = cy - 0.5 * ph / scale;
  auto sx = [&](double x) { return fmt("%.2f", kLeft + (x - x0) * scale); };
  auto sy = [&](double y) { return fmt("%.2f", kTop + ph - (y - y0) * scale); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"14\">" << escape(data.title) << "</text>\n";

  // Axes with five ticks each.
  out << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
      << "\" height=\"" << ph << "\"/></g>\n<g fill=\"black\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double tx = x0 + k * 0.25 * pw / scale;
    const double ty = y0 + k * 0.25 * ph / scale;
    out << "<line x1=\"" << sx(tx) << "\" y1=\"" << kTop + ph << "\" x2=\"" << sx(tx) << "\" y2=\"" << kTop + ph + 5
        << "\" stroke=\"black\"/><text x=\"" << sx(tx) << "\" y=\"" << kTop + ph + 18
        << "\" text-anchor=\"middle\">" << fmt("%.3g", tx) << "</text>\n";
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << sy(ty) << "\" x2=\"" << kLeft << "\" y2=\"" << sy(ty)
        << "\" stroke=\"black\"/><text x=\"" << kLeft - 8 << "\" y=\"" << sy(ty)
        << "\" text-anchor=\"end\" dominant-baseline=\"middle\">" << fmt("%.3g", ty) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + 0.5 * pw << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">x" << u
      << "</text>\n<text x=\"18\" y=\"" << kTop + 0.5 * ph << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + 0.5 * ph << ")\">x" << v << "</text>\n</g>\n";

  out << "<g fill=\"#9a9a9a\">\n";
  for (const auto& p : samples) out << "<circle cx=\"" << sx(p[0]) << "\" cy=\"" << sy(p[1]) << "\" r=\"1.2\"/>\n";
  out << "</g>\n<g>\n";
  for (const auto& [p, val] : medial) {
    const double t = vmax > vmin ? (val - vmin) / (vmax - vmin) : 1.0;
    out << "<circle cx=\"" << sx(p[0]) << "\" cy=\"" << sy(p[1]) << "\" r=\"2.2\" fill=\"" << color_for(t) << "\"/>\n";
  }
  out << "</g>\n<g fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\">\n";
  for (const auto& path : data.paths) {
    out << "<polyline points=\"";
    for (std::size_t i = 0; i < path.vertices.size(); ++i) {
      out << (i ? " " : "") << sx(path.vertices[i][u]) << ',' << sy(path.vertices[i][v]);
    }
    out << "\"/>\n";
  }
  out << "</g>\n<g fill=\"none\" stroke=\"black\" stroke-width=\"1.5\">\n";
  for (const auto& m : data.markers) {
    out << "<path d=\"M" << sx(m[u]) << ' ' << sy(m[v]) << " m-5 -5 l10 10 m0 -10 l-10 10\"/>\n";
  }
  out << "</g>\n";

  // Legend.
  const double lx = kWidth - kRight + 20;
  out << "<g id=\"legend\">\n<circle cx=\"" << lx << "\" cy=\"" << kTop + 10 << "\" r=\"3\" fill=\"#9a9a9a\"/><text x=\"" << lx + 10
      << "\" y=\"" << kTop + 14 << "\">samples</text>\n";
  for (int k = 0; k < 5; ++k) {
    out << "<rect x=\"" << lx - 3 + 12 * k << "\" y=\"" << kTop + 26 << "\" width=\"12\" height=\"8\" fill=\""
        << color_for(k / 4.0) << "\"/>\n";
  }
  out << "<text x=\"" << lx << "\" y=\"" << kTop + 48 << "\">medial spread</text>\n";
  if (!medial.empty()) {
    out << "<text x=\"" << lx << "\" y=\"" << kTop + 62 << "\">" << fmt("%.3g", vmin) << " .. " << fmt("%.3g", vmax)
        << "</text>\n";
  }
  out << "<line x1=\"" << lx - 3 << "\" y1=\"" << kTop + 78 << "\" x2=\"" << lx + 9 << "\" y2=\"" << kTop + 78
      << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/><text x=\"" << lx + 14 << "\" y=\"" << kTop + 82
      << "\">paths</text>\n";
  out << "<path d=\"M" << lx - 2 << ' ' << kTop + 92 << " l8 8 m0 -8 l-8 8\" stroke=\"black\"/><text x=\"" << lx + 14
      << "\" y=\"" << kTop + 100 << "\">probe points</text>\n";
  if (slice.normal) {
    out << "<text x=\"" << lx - 3 << "\" y=\"" << kTop + 120 << "\">slice |x" << *slice.normal << " - "
        << fmt("%.3g", slice.value) << "| &lt;= " << fmt("%.3g", slice.thickness) << "</text>\n";
  }
  if (warning) out << "<text x=\"" << lx - 3 << "\" y=\"" << kTop + 136 << "\">" << *warning << "</text>\n";
  out << "</g>\n</svg>\n";
  return warning;
}

}  // namespace medlab
