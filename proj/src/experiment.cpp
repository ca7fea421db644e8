#include "medlab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

namespace medlab {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr std::size_t kPlotSampleCap = 8000;

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw Error(Errc::invalid_config, "field '" + field + "': " + what);
}

const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) bad(path + key, "is required");
  return j.at(key);
}

double get_number(const Json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "must be a number");
  return j.get<double>();
}

double number_or(const Json& j, const std::string& key, const std::string& path, double fallback) {
  return j.contains(key) ? get_number(j.at(key), path + key) : fallback;
}

std::size_t count_or(const Json& j, const std::string& key, const std::string& path, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) bad(path + key, "must be a non-negative integer");
  return v.get<std::size_t>();
}

std::string string_or(const Json& j, const std::string& key, const std::string& path, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) bad(path + key, "must be a string");
  return j.at(key).get<std::string>();
}

Vec get_vec(const Json& j, const std::string& field, std::size_t dim) {
  Vec v;
  try {
    v = vec_from_json(j);
  } catch (const Error&) {
    bad(field, "must be an array of numbers");
  }
  if (dim != 0 && static_cast<std::size_t>(v.size()) != dim) {
    bad(field, "must have " + std::to_string(dim) + " coordinates");
  }
  return v;
}

std::vector<Vec> get_points(const Json& j, const std::string& field, std::size_t dim) {
  if (!j.is_array()) bad(field, "must be an array of points");
  std::vector<Vec> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_vec(j[i], field + "[" + std::to_string(i) + "]", dim));
  return out;
}

std::vector<double> get_radii(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() < 2) bad(field, "must list at least two radii");
  std::vector<double> r;
  for (std::size_t i = 0; i < j.size(); ++i) {
    r.push_back(get_number(j[i], field + "[" + std::to_string(i) + "]"));
    if (!(r.back() > 0.0)) bad(field, "radii must be positive");
    if (i > 0 && !(r[i] < r[i - 1])) bad(field, "radii must be strictly decreasing");
  }
  return r;
}

bool analytic_oracle(const Json& j, const std::string& path) {
  const auto o = string_or(j, "oracle", path, "cloud");
  if (o != "cloud" && o != "analytic") bad(path + "oracle", "must be \"cloud\" or \"analytic\"");
  return o == "analytic";
}

SliceSpec parse_slice(const Json& j, const std::string& path, std::size_t dim) {
  SliceSpec s = SliceSpec::for_dim(dim);
  if (!j.contains("slice")) return s;
  const auto& sj = j.at("slice");
  const std::string sp = path + "slice.";
  auto axis = [&](const Json& a, const std::string& f) {
    if (!a.is_number_integer() || a.get<int>() < 0 || a.get<std::size_t>() >= dim) {
      bad(f, "must be an axis index below " + std::to_string(dim));
    }
    return a.get<int>();
  };
  if (sj.contains("axes")) {
    const auto& ax = sj.at("axes");
    if (!ax.is_array() || ax.size() != 2) bad(sp + "axes", "must list two axis indices");
    s.axis_u = axis(ax[0], sp + "axes[0]");
    s.axis_v = axis(ax[1], sp + "axes[1]");
    if (s.axis_u == s.axis_v) bad(sp + "axes", "axes must differ");
  }
  if (sj.contains("normal")) {
    s.normal = axis(sj.at("normal"), sp + "normal");
  } else if (dim > 2) {
    for (int k = 0; k < static_cast<int>(dim); ++k) {
      if (k != s.axis_u && k != s.axis_v) {
        s.normal = k;
        break;
      }
    }
  }
  s.value = number_or(sj, "value", sp, 0.0);
  s.thickness = number_or(sj, "thickness", sp, 0.0);
  if (s.thickness < 0.0) bad(sp + "thickness", "must be non-negative");
  return s;
}

ShapeSpec parse_shape(const Json& j, const std::string& base_dir) {
  if (!j.is_object()) bad("shape", "must be an object");
  ShapeSpec spec;
  const auto& kind = require(j, "kind", "shape.");
  if (!kind.is_string()) bad("shape.kind", "must be a string");
  try {
    spec.kind = parse_shape_kind(kind.get<std::string>());
  } catch (const Error& e) {
    bad("shape.kind", e.what());
  }
  if (j.contains("params")) {
    const auto& p = j.at("params");
    if (!p.is_object()) bad("shape.params", "must be an object");
    for (const auto& [k, v] : p.items()) spec.params[k] = get_number(v, "shape.params." + k);
  }
  spec.ambient_dim = static_cast<int>(count_or(j, "ambient_dim", "shape.", 0));
  if (j.contains("points")) spec.points = get_points(j.at("points"), "shape.points", 0);
  if (j.contains("points_csv")) {
    fs::path file = string_or(j, "points_csv", "shape.", "");
    if (file.is_relative()) file = fs::path(base_dir) / file;
    try {
      spec.points = read_point_csv_file(file.string());
    } catch (const Error& e) {
      bad("shape.points_csv", e.what());
    }
  }
  if (j.contains("segments")) {
    const auto& segs = j.at("segments");
    if (!segs.is_array()) bad("shape.segments", "must be an array of [a, b] pairs");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string f = "shape.segments[" + std::to_string(i) + "]";
      if (!segs[i].is_array() || segs[i].size() != 2) bad(f, "must be a pair of points");
      spec.segments.push_back({get_vec(segs[i][0], f + "[0]", 0), get_vec(segs[i][1], f + "[1]", 0)});
    }
  }
  try {
    make_shape(spec);
  } catch (const Error& e) {
    bad("shape", e.what());
  }
  return spec;
}

ScanParams parse_scan(const Json& j, const std::string& path, std::size_t dim) {
  ScanParams p;
  std::vector<int> res;
  const auto& r = require(j, "resolution", path);
  if (r.is_number_integer()) {
    res.assign(dim, r.get<int>());
  } else if (r.is_array() && r.size() == dim) {
    for (const auto& x : r) {
      if (!x.is_number_integer()) bad(path + "resolution", "must be integers");
      res.push_back(x.get<int>());
    }
  } else {
    bad(path + "resolution", "must be an integer or one integer per axis");
  }
  for (int x : res) {
    if (x < 2 || x > 4001) bad(path + "resolution", "must lie in [2, 4001]");
  }
  if (j.contains("box") == j.contains("ball")) bad(path + "box", "exactly one of box and ball is required");
  if (j.contains("box")) {
    const auto& b = j.at("box");
    p.grid.box.lo = get_vec(require(b, "lo", path + "box."), path + "box.lo", dim);
    p.grid.box.hi = get_vec(require(b, "hi", path + "box."), path + "box.hi", dim);
    if (!(p.grid.box.lo.array() <= p.grid.box.hi.array()).all()) bad(path + "box", "lo must not exceed hi");
  } else {
    const auto& b = j.at("ball");
    const Vec c = get_vec(require(b, "center", path + "ball."), path + "ball.center", dim);
    const double rad = get_number(require(b, "radius", path + "ball."), path + "ball.radius");
    if (!(rad > 0.0)) bad(path + "ball.radius", "must be positive");
    p.grid = GridSpec::ball(c, rad, 2);
  }
  p.grid.resolution = res;
  if (j.contains("probes")) {
    const auto& pr = j.at("probes");
    if (!pr.is_object()) bad(path + "probes", "must map names to points");
    for (const auto& [k, v] : pr.items()) p.probes[k] = get_vec(v, path + "probes." + k, dim);
  }
  if (j.contains("refine")) {
    const auto& rf = j.at("refine");
    if (!rf.is_array()) bad(path + "refine", "must be an array of [u, v] segments");
    for (std::size_t i = 0; i < rf.size(); ++i) {
      const std::string f = path + "refine[" + std::to_string(i) + "]";
      if (!rf[i].is_array() || rf[i].size() != 2) bad(f, "must be a pair of points");
      p.refine.push_back({get_vec(rf[i][0], f + "[0]", dim), get_vec(rf[i][1], f + "[1]", dim)});
    }
  }
  p.refine_tol = number_or(j, "refine_tol", path, 1e-6);
  if (!(p.refine_tol > 0.0)) bad(path + "refine_tol", "must be positive");
  p.analytic = analytic_oracle(j, path);
  p.slice = parse_slice(j, path, dim);
  return p;
}

LneFieldParams parse_lne(const Json& j, const std::string& path, std::size_t dim) {
  LneFieldParams p;
  if (j.contains("points")) p.points = get_points(j.at("points"), path + "points", dim);
  p.random_points = count_or(j, "random_points", path, 0);
  if (p.points.empty() && p.random_points == 0) bad(path + "points", "give points or random_points");
  p.radii = get_radii(require(j, "radii", path), path + "radii");
  p.sources = count_or(j, "sources", path, 16);
  p.slice = parse_slice(j, path, dim);
  return p;
}

LipschitzParams parse_lipschitz(const Json& j, const std::string& path, std::size_t dim) {
  LipschitzParams p;
  const auto& r = require(j, "region", path);
  const std::string rp = path + "region.";
  const Vec c = get_vec(require(r, "center", rp), rp + "center", dim);
  const double rad = get_number(require(r, "radius", rp), rp + "radius");
  if (r.contains("axis")) {
    p.region = ProbeRegion::segment(c, get_vec(r.at("axis"), rp + "axis", dim), rad);
  } else {
    p.region = ProbeRegion::annulus(c, number_or(r, "inner_radius", rp, 0.0), rad);
  }
  try {
    p.region.validate();
  } catch (const Error& e) {
    bad(path + "region", e.what());
  }
  p.pairs = count_or(j, "pairs", path, 10000);
  if (p.pairs == 0) bad(path + "pairs", "must be positive");
  p.analytic = analytic_oracle(j, path);
  if (j.contains("certify")) {
    const auto& cj = j.at("certify");
    const std::string cp = path + "certify.";
    p.certify.resolution = static_cast<int>(count_or(cj, "resolution", cp, 101));
    p.certify.cross_resolution = static_cast<int>(count_or(cj, "cross_resolution", cp, 21));
    p.certify.margin = number_or(cj, "margin", cp, 0.5);
    p.certify.jump_factor = number_or(cj, "jump_factor", cp, 20.0);
    if (p.certify.resolution < 2 || p.certify.cross_resolution < 2) bad(cp + "resolution", "must be at least 2");
    if (!(p.certify.margin > 0.0)) bad(cp + "margin", "must be positive");
  }
  if (j.contains("on_set")) {
    const auto& oj = j.at("on_set");
    p.on_set_pairs = count_or(oj, "pairs", path + "on_set.", 10000);
    p.on_set_max_offset = number_or(oj, "max_offset", path + "on_set.", 0.0);
  }
  p.slice = parse_slice(j, path, dim);
  return p;
}

TheoremParams parse_theorem(const Json& j, const std::string& path, std::size_t dim) {
  TheoremParams p;
  if (j.contains("points")) p.points = get_points(j.at("points"), path + "points", dim);
  p.random_points = count_or(j, "random_points", path, 0);
  if (p.points.empty() && p.random_points == 0) bad(path + "points", "give points or random_points");
  p.config.radii = get_radii(require(j, "radii", path), path + "radii");
  p.config.source_count = count_or(j, "sources", path, 16);
  p.config.scan_resolution = static_cast<int>(count_or(j, "scan_resolution", path, dim > 2 ? 17 : 41));
  p.config.rectifiable_pairs = static_cast<int>(count_or(j, "rectifiable_pairs", path, 4));
  p.config.projection_steps = static_cast<int>(count_or(j, "projection_steps", path, 200));
  if (p.config.scan_resolution < 2) bad(path + "scan_resolution", "must be at least 2");
  if (p.config.projection_steps < 1) bad(path + "projection_steps", "must be positive");
  p.slice = parse_slice(j, path, dim);
  return p;
}

ConjectureParams parse_conjecture(const Json& j, const std::string& path, std::size_t dim) {
  ConjectureParams p;
  p.point = get_vec(require(j, "point", path), path + "point", dim);
  if (j.contains("medial_points")) {
    p.medial_points = get_points(j.at("medial_points"), path + "medial_points", dim);
  } else {
    p.radius = get_number(require(j, "radius", path), path + "radius");
    if (!(p.radius > 0.0)) bad(path + "radius", "must be positive");
    p.count = count_or(j, "count", path, 6);
    if (p.count == 0) bad(path + "count", "must be positive");
    p.resolution = static_cast<int>(count_or(j, "resolution", path, dim > 2 ? 17 : 41));
    if (p.resolution < 2) bad(path + "resolution", "must be at least 2");
  }
  p.slice = parse_slice(j, path, dim);
  return p;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

struct Check {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double bound = 0.0;
};

struct Artifacts {
  Json result;
  std::string csv;
  PlotData plot;
  SliceSpec slice;
  std::vector<Check> checks;
};

struct Context {
  const ExperimentConfig& config;
  std::unique_ptr<Shape> shape;
  std::unique_ptr<SpatialIndex> index;
  std::unique_ptr<GeodesicGraph> graph;
  Thresholds cloud_thr;
  Thresholds exact_thr;

  const GeodesicGraph& need_graph() {
    if (!graph) graph = std::make_unique<GeodesicGraph>(*index, config.connect_factor * index->resolution());
    return *graph;
  }
};

std::vector<Vec> plot_samples(const SpatialIndex& index) {
  const std::size_t stride = (index.size() + kPlotSampleCap - 1) / kPlotSampleCap;
  std::vector<Vec> out;
  for (std::size_t i = 0; i < index.size(); i += stride) out.push_back(index.point(i));
  return out;
}

std::string csv_header(std::size_t dim, const std::string& prefix) {
  std::string h;
  for (std::size_t k = 0; k < dim; ++k) h += (k ? "," : "") + prefix + std::to_string(k);
  return h;
}

std::string csv_vec(const Vec& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (Eigen::Index k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
  return os.str();
}

std::string csv_num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::vector<Vec> pick_points(const SpatialIndex& index, const std::vector<Vec>& explicit_points, std::size_t random,
                             std::uint64_t seed) {
  std::vector<Vec> out = explicit_points;
  Rng rng(seed);
  for (std::size_t i = 0; i < random; ++i) out.push_back(index.point(rng.index(index.size())));
  return out;
}

PlotPolyline geodesic_polyline(const GeodesicGraph& graph, const Vec& a, const Vec& b, std::string label) {
  PlotPolyline line;
  line.label = std::move(label);
  const auto& index = graph.index();
  for (auto v : graph.shortest_path(index.nearest(a), index.nearest(b))) line.vertices.push_back(index.point(v));
  return line;
}

Artifacts run_scan(Context& ctx, const ScanParams& p) {
  Artifacts out;
  const ClosestPointOracle& oracle = p.analytic ? static_cast<const ClosestPointOracle&>(*ctx.shape) : *ctx.index;
  const Thresholds thr = p.analytic ? ctx.exact_thr : ctx.cloud_thr;
  const auto report = scan_medial(oracle, p.grid, thr, p.probes);
  out.result = to_json(report);
  out.result["oracle"] = p.analytic ? "analytic" : "cloud";
  std::size_t outside = 0;
  const double box_tol = 1e-12 * std::max(1.0, ctx.index->scale());
  for (const auto& s : report.samples) {
    outside += !((s.location.array() >= p.grid.box.lo.array() - box_tol).all() &&
                 (s.location.array() <= p.grid.box.hi.array() + box_tol).all());
  }
  out.checks.push_back({"samples_in_grid_box", outside == 0, static_cast<double>(outside), 0.0});
  Json refined = Json::array();
  double worst_bracket = 0.0;
  for (const auto& [u, v] : p.refine) {
    Json r{{"u", to_json(u)}, {"v", to_json(v)}};
    try {
      const auto s = refine_jump(oracle, u, v, p.refine_tol, thr);
      r["sample"] = to_json(s);
      worst_bracket = std::max(worst_bracket, s.bracket);
      out.plot.medial.push_back({s.location, s.spread});
    } catch (const Error& e) {
      r["error"] = e.what();
    }
    refined.push_back(r);
  }
  if (!p.refine.empty()) {
    out.result["refined"] = refined;
    out.checks.push_back({"refine_bracket", worst_bracket <= p.refine_tol, worst_bracket, p.refine_tol});
  }
  std::ostringstream csv;
  write_scan_csv(csv, report);
  out.csv = csv.str();
  out.plot.samples = plot_samples(*ctx.index);
  for (const auto& s : report.samples) out.plot.medial.push_back({s.location, s.spread});
  for (const auto& [name, x] : p.probes) out.plot.markers.push_back(x);
  out.slice = p.slice;
  if (out.slice.normal && out.slice.thickness == 0.0) {
    out.slice.thickness = std::max(0.5 * p.grid.step(static_cast<std::size_t>(*out.slice.normal)),
                                   2.0 * ctx.index->resolution());
  }
  return out;
}

Artifacts run_lne(Context& ctx, const LneFieldParams& p, std::uint64_t seed) {
  Artifacts out;
  const auto& graph = ctx.need_graph();
  const auto points = pick_points(*ctx.index, p.points, p.random_points, seed);
  Json reports = Json::array();
  std::ostringstream csv;
  csv << csv_header(ctx.index->dim(), "x") << ",radius,constant,verdict\n";
  double min_constant = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    LneReport rep;
    try {
      rep = estimate_lne_verdict(graph, points[i], p.radii, p.sources, seed + i + 1);
    } catch (const Error& e) {
      if (e.code() != Errc::insufficient_points) throw;
      rep.point = points[i];
      rep.radii = p.radii;
      rep.note = e.what();
    }
    for (std::size_t k = 0; k < rep.constants.size(); ++k) {
      csv << csv_vec(points[i]) << ',' << csv_num(rep.radii[k]) << ',' << csv_num(rep.constants[k]) << ','
          << to_string(rep.verdict) << '\n';
      min_constant = std::min(min_constant, rep.constants[k]);
    }
    if (!rep.samples.empty()) {
      const auto& last = rep.samples.back();
      out.plot.paths.push_back(geodesic_polyline(graph, last.witness_a, last.witness_b, "witness"));
    }
    out.plot.markers.push_back(points[i]);
    reports.push_back(to_json(rep));
  }
  out.result = Json{{"points", reports}};
  out.csv = csv.str();
  if (std::isfinite(min_constant)) out.checks.push_back({"constants_at_least_one", min_constant >= 1.0 - 1e-9, min_constant, 1.0});
  out.plot.samples = plot_samples(*ctx.index);
  out.slice = p.slice;
  if (out.slice.normal && out.slice.thickness == 0.0) out.slice.thickness = 2.0 * ctx.index->resolution();
  return out;
}

void add_region_outline(PlotData& plot, const ProbeRegion& r) {
  if (r.axis) {
    const Vec a = r.axis->normalized();
    plot.paths.push_back({{r.center - r.radius * a, r.center + r.radius * a}, "region"});
    return;
  }
  for (double rad : {r.radius, r.inner_radius}) {
    if (rad <= 0.0) continue;
    PlotPolyline ring;
    ring.label = "region";
    for (int k = 0; k <= 96; ++k) {
      Vec x = r.center;
      const double t = 2.0 * 3.14159265358979323846 * k / 96.0;
      x[0] += rad * std::cos(t);
      x[1] += rad * std::sin(t);
      ring.vertices.push_back(x);
    }
    plot.paths.push_back(std::move(ring));
  }
}

Artifacts run_lipschitz(Context& ctx, const LipschitzParams& p, std::uint64_t seed) {
  Artifacts out;
  const ClosestPointOracle& oracle = p.analytic ? static_cast<const ClosestPointOracle&>(*ctx.shape) : *ctx.index;
  const Thresholds thr = p.analytic ? ctx.exact_thr : ctx.cloud_thr;
  ProbeRegion region = p.region;
  const auto cert = certify_region(oracle, region, thr, p.certify);
  const auto rep = lipschitz_quotient(oracle, region, p.pairs, seed, thr);
  out.result = to_json(rep);
  out.result["oracle"] = p.analytic ? "analytic" : "cloud";
  out.result["certificate"] = to_json(cert);
  double inside = std::numeric_limits<double>::infinity();
  for (const auto& s : cert.scan.samples) inside = std::min(inside, region.distance_to(s.location));
  out.checks.push_back({"region_medial_free", !(inside <= region.delta), inside, region.delta});
  out.checks.push_back({"proposition_bound", rep.empirical_quotient <= rep.paper_bound, rep.empirical_quotient,
                        rep.paper_bound});
  const double on_set_bound = 2.0 + 4.0 * rep.fill_distance / rep.min_pair_distance + 1e-12;
  out.checks.push_back({"on_set_bound", rep.on_set_quotient <= on_set_bound, rep.on_set_quotient, on_set_bound});

  std::ostringstream csv;
  csv << "delta,sup_dist,empirical_quotient,paper_bound,pair_count,on_set_quotient,min_pair_distance\n"
      << csv_num(region.delta) << ',' << csv_num(region.sup_dist) << ',' << csv_num(rep.empirical_quotient) << ','
      << csv_num(rep.paper_bound) << ',' << rep.pair_count << ',' << csv_num(rep.on_set_quotient) << ','
      << csv_num(rep.min_pair_distance) << '\n';

  if (p.on_set_pairs > 0) {
    const double offset = p.on_set_max_offset > 0.0 ? p.on_set_max_offset : 0.5 * ctx.index->scale();
    const auto on = on_set_quotient(*ctx.index, p.on_set_pairs, seed + 1, offset);
    out.result["on_set"] = to_json(on);
    const double bound = 2.0 + 4.0 * ctx.index->resolution() / on.min_pair_distance + 1e-12;
    out.checks.push_back({"on_set_cloud_bound", on.max_quotient <= bound, on.max_quotient, bound});
  }
  out.csv = csv.str();
  out.plot.samples = plot_samples(*ctx.index);
  for (const auto& s : cert.scan.samples) out.plot.medial.push_back({s.location, s.spread});
  for (const auto& x : cert.jump_points) out.plot.medial.push_back({x, 0.0});
  add_region_outline(out.plot, region);
  out.plot.paths.push_back({{rep.worst_p, rep.worst_q}, "worst pair"});
  out.plot.markers.push_back(region.center);
  out.slice = p.slice;
  if (out.slice.normal && out.slice.thickness == 0.0) {
    out.slice.normal = out.slice.normal;
    out.slice.value = region.center[*out.slice.normal];
    out.slice.thickness = std::max(cert.scan.grid.max_step(), 2.0 * ctx.index->resolution());
  }
  return out;
}

Artifacts run_theorem(Context& ctx, const TheoremParams& p, std::uint64_t seed) {
  Artifacts out;
  const auto& graph = ctx.need_graph();
  const auto points = pick_points(*ctx.index, p.points, p.random_points, seed);
  Json verdicts = Json::array();
  std::ostringstream csv;
  csv << csv_header(ctx.index->dim(), "x")
      << ",radius,constant,flagged,nearest_medial,lne_verdict,medial_approach,consistent\n";
  std::size_t consistent = 0, rectifiable = 0;
  double min_constant = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    TheoremConfig cfg = p.config;
    cfg.seed = seed + i + 1;
    const auto v = verify_theorem(graph, points[i], cfg);
    consistent += v.consistent;
    rectifiable += v.rectifiable;
    for (std::size_t k = 0; k < v.balls.size(); ++k) {
      const double c = k < v.lne.constants.size() ? v.lne.constants[k] : std::numeric_limits<double>::quiet_NaN();
      if (k < v.lne.constants.size()) min_constant = std::min(min_constant, c);
      csv << csv_vec(points[i]) << ',' << csv_num(v.balls[k].radius) << ',' << csv_num(c) << ','
          << v.balls[k].flagged << ',' << csv_num(v.balls[k].nearest_medial) << ',' << to_string(v.lne.verdict) << ','
          << (v.medial_approach ? "true" : "false") << ',' << (v.consistent ? "true" : "false") << '\n';
    }
    for (const auto& s : v.medial_samples) out.plot.medial.push_back({s.location, s.spread});
    out.plot.markers.push_back(points[i]);
    verdicts.push_back(to_json(v));
  }
  out.result = Json{{"verdicts", verdicts}, {"consistent_count", consistent}, {"point_count", points.size()}};
  out.csv = csv.str();
  out.checks.push_back({"theorem_consistent", consistent == points.size(), static_cast<double>(consistent),
                        static_cast<double>(points.size())});
  out.checks.push_back({"projection_paths_rectifiable", rectifiable == points.size(), static_cast<double>(rectifiable),
                        static_cast<double>(points.size())});
  if (std::isfinite(min_constant)) out.checks.push_back({"constants_at_least_one", min_constant >= 1.0 - 1e-9, min_constant, 1.0});
  out.plot.samples = plot_samples(*ctx.index);
  out.slice = p.slice;
  if (out.slice.normal && out.slice.thickness == 0.0) {
    out.slice.value = points.empty() ? 0.0 : points.front()[*out.slice.normal];
    out.slice.thickness = std::max(2.0 * ctx.index->resolution(), 0.5 * p.config.radii.front() / (p.config.scan_resolution - 1));
  }
  return out;
}

Artifacts run_conjecture(Context& ctx, const ConjectureParams& p) {
  Artifacts out;
  const auto& graph = ctx.need_graph();
  const auto trace = p.medial_points.empty()
                         ? conjecture_probe(graph, p.point, p.radius, p.count, p.resolution, ctx.cloud_thr)
                         : conjecture_trace(graph, p.point, p.medial_points, ctx.cloud_thr);
  out.result = to_json(trace);
  std::ostringstream csv;
  const std::size_t n = ctx.index->dim();
  csv << "k," << csv_header(n, "xi") << ',' << csv_header(n, "a") << ',' << csv_header(n, "b") << ",inner,outer,ratio\n";
  bool members = true;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trace.ratios.size(); ++k) {
    const auto& [a, b] = trace.witness_pairs[k];
    csv << k << ',' << csv_vec(trace.medial_points[k]) << ',' << csv_vec(a) << ',' << csv_vec(b) << ','
        << csv_num(trace.inner[k]) << ',' << csv_num(trace.outer[k]) << ',' << csv_num(trace.ratios[k]) << '\n';
    const auto ns = ctx.index->near_set(trace.medial_points[k], ctx.cloud_thr.epsilon);
    bool has_a = false, has_b = false;
    for (const auto& m : ns.members) {
      has_a = has_a || m == a;
      has_b = has_b || m == b;
    }
    members = members && has_a && has_b;
    if (std::isfinite(trace.ratios[k])) min_ratio = std::min(min_ratio, trace.ratios[k]);
    out.plot.medial.push_back({trace.medial_points[k], trace.ratios[k]});
    out.plot.paths.push_back(geodesic_polyline(graph, a, b, "witness geodesic"));
  }
  out.csv = csv.str();
  out.checks.push_back({"witnesses_in_near_set", members, members ? 1.0 : 0.0, 1.0});
  if (std::isfinite(min_ratio)) out.checks.push_back({"ratios_at_least_one", min_ratio >= 1.0 - 1e-9, min_ratio, 1.0});
  out.plot.samples = plot_samples(*ctx.index);
  out.plot.markers.push_back(p.point);
  out.slice = p.slice;
  if (out.slice.normal && out.slice.thickness == 0.0) {
    out.slice.value = p.point[*out.slice.normal];
    out.slice.thickness = std::max(2.0 * ctx.index->resolution(), p.radius / std::max(p.resolution - 1, 1));
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(Errc::io, "failed writing " + path.string());
}

Json shape_json(const ShapeSpec& s) {
  Json params = Json::object();
  for (const auto& [k, v] : s.params) params[k] = num(v);
  Json j{{"kind", std::string(to_string(s.kind))}, {"id", s.id()}, {"params", params}};
  if (s.ambient_dim) j["ambient_dim"] = s.ambient_dim;
  if (!s.points.empty()) j["point_count"] = s.points.size();
  if (!s.segments.empty()) j["segment_count"] = s.segments.size();
  return j;
}

}  // namespace

ExperimentConfig parse_config(const Json& doc, const std::string& base_dir) {
  if (!doc.is_object()) bad("<root>", "config must be a JSON object");
  for (const auto& [k, v] : doc.items()) {
    static const std::set<std::string> known = {"shape",          "sample_count",   "seed",
                                                "experiments",    "output_dir",     "epsilon_factor",
                                                "lambda_factor",  "connect_factor", "description"};
    if (!known.count(k)) bad(k, "unknown field");
  }
  ExperimentConfig c;
  c.shape = parse_shape(require(doc, "shape", ""), base_dir);
  const auto& sc = require(doc, "sample_count", "");
  if (!sc.is_number_integer() || sc.get<long long>() < 1 || sc.get<long long>() > 1000000) {
    bad("sample_count", "must be an integer in [1, 1000000]");
  }
  c.sample_count = sc.get<std::size_t>();
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) bad("seed", "must be a non-negative integer");
    c.seed = doc.at("seed").get<std::uint64_t>();
  }
  c.output_dir = string_or(doc, "output_dir", "", c.output_dir);
  c.epsilon_factor = number_or(doc, "epsilon_factor", "", 2.0);
  c.lambda_factor = number_or(doc, "lambda_factor", "", 10.0);
  c.connect_factor = number_or(doc, "connect_factor", "", 4.0);
  if (!(c.epsilon_factor > 0.0)) bad("epsilon_factor", "must be positive");
  if (!(c.lambda_factor > 0.0)) bad("lambda_factor", "must be positive");
  if (!(c.connect_factor >= 4.0)) bad("connect_factor", "must be at least 4");

  const std::size_t dim = make_shape(c.shape)->dim();
  const auto& exps = require(doc, "experiments", "");
  if (!exps.is_array()) bad("experiments", "must be an array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    const std::string path = "experiments[" + std::to_string(i) + "].";
    const auto& e = exps[i];
    if (!e.is_object()) bad(path.substr(0, path.size() - 1), "must be an object");
    ExperimentSpec spec;
    spec.source = e;
    const auto& type = require(e, "type", path);
    if (!type.is_string()) bad(path + "type", "must be a string");
    spec.type = type.get<std::string>();
    spec.name = string_or(e, "name", path, spec.type);
    if (spec.name.empty() || spec.name.find_first_of("/\\") != std::string::npos) {
      bad(path + "name", "must be a plain file-name stem");
    }
    if (!names.insert(spec.name).second) bad(path + "name", "duplicate experiment name '" + spec.name + "'");
    if (e.contains("seed")) {
      if (!e.at("seed").is_number_unsigned()) bad(path + "seed", "must be a non-negative integer");
      spec.seed = e.at("seed").get<std::uint64_t>();
    }
    if (spec.type == "scan-medial") {
      spec.params = parse_scan(e, path, dim);
    } else if (spec.type == "lne-field") {
      spec.params = parse_lne(e, path, dim);
    } else if (spec.type == "lipschitz") {
      spec.params = parse_lipschitz(e, path, dim);
    } else if (spec.type == "verify-theorem") {
      spec.params = parse_theorem(e, path, dim);
    } else if (spec.type == "conjecture") {
      spec.params = parse_conjecture(e, path, dim);
    } else {
      bad(path + "type", "unknown experiment type '" + spec.type +
                             "' (scan-medial, lne-field, lipschitz, verify-theorem, conjecture)");
    }
    c.experiments.push_back(std::move(spec));
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::invalid_config, "cannot open config " + path);
  Json doc;
  try {
    doc = Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::invalid_config, "config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string());
}

std::optional<std::uint64_t> seed_override_from_env() {
  const char* s = std::getenv("MEDLAB_SEED_OVERRIDE");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0' || *s == '-') throw Error(Errc::invalid_config, "MEDLAB_SEED_OVERRIDE must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

bool RunResult::passed() const {
  for (const auto& e : experiments) {
    if (!e.passed) return false;
  }
  return true;
}

bool RunResult::errored() const {
  for (const auto& e : experiments) {
    if (!e.error.empty()) return true;
  }
  return false;
}

int RunResult::exit_code() const {
  if (errored()) return 3;
  return passed() ? 0 : 1;
}

RunResult run_experiments(const ExperimentConfig& config, const RunOptions& options) {
  using Clock = std::chrono::steady_clock;
  RunResult result;
  const fs::path dir = options.output_dir ? *options.output_dir : config.output_dir;
  result.output_dir = dir.string();
  fs::create_directories(dir);
  auto log = [&](const std::string& line) {
    if (options.log) *options.log << "[medlab] " << line << '\n';
  };
  const std::uint64_t seed = options.seed_override ? *options.seed_override : config.seed;

  Json manifest{{"tool", "medlab"},
                {"version", kVersion},
                {"created", timestamp_utc()},
                {"config", options.config_path},
                {"output_dir", dir.string()},
                {"seed", seed},
                {"seed_override", options.seed_override ? Json(*options.seed_override) : Json(nullptr)},
                {"shape", shape_json(config.shape)},
                {"sample_count", config.sample_count}};
  Json entries = Json::array();

  if (!config.experiments.empty()) {
    Context ctx{config, make_shape(config.shape), nullptr, nullptr, {}, {}};
    const auto t0 = Clock::now();
    ctx.index = std::make_unique<SpatialIndex>(sample_shape(*ctx.shape, config.sample_count, seed));
    ctx.cloud_thr = Thresholds::defaults_for(*ctx.index, config.epsilon_factor, config.lambda_factor);
    ctx.exact_thr = Thresholds::defaults_for(*ctx.shape, config.epsilon_factor, config.lambda_factor);
    manifest["fill_distance"] = num(ctx.index->resolution());
    log("sampled " + std::to_string(ctx.index->size()) + " points of " + config.shape.id() + ", fill " +
        std::to_string(ctx.index->resolution()) + " (" +
        std::to_string(std::chrono::duration<double>(Clock::now() - t0).count()) + " s)");

    std::ostringstream summary;
    summary << "experiment,type,check,passed,value,bound\n";
    for (std::size_t i = 0; i < config.experiments.size(); ++i) {
      const auto& spec = config.experiments[i];
      const std::uint64_t exp_seed = options.seed_override ? seed + i + 1 : spec.seed.value_or(seed + i + 1);
      ExperimentOutcome outcome{spec.name, spec.type, false, ""};
      Json entry{{"name", spec.name}, {"type", spec.type}, {"seed", exp_seed}};
      const auto start = Clock::now();
      try {
        Artifacts art = std::visit(
            [&](const auto& p) -> Artifacts {
              using P = std::decay_t<decltype(p)>;
              if constexpr (std::is_same_v<P, ScanParams>) return run_scan(ctx, p);
              if constexpr (std::is_same_v<P, LneFieldParams>) return run_lne(ctx, p, exp_seed);
              if constexpr (std::is_same_v<P, LipschitzParams>) return run_lipschitz(ctx, p, exp_seed);
              if constexpr (std::is_same_v<P, TheoremParams>) return run_theorem(ctx, p, exp_seed);
              if constexpr (std::is_same_v<P, ConjectureParams>) return run_conjecture(ctx, p);
            },
            spec.params);
        outcome.passed = true;
        Json checks = Json::array();
        for (const auto& c : art.checks) {
          outcome.passed = outcome.passed && c.passed;
          checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", num(c.value)}, {"bound", num(c.bound)}});
          summary << spec.name << ',' << spec.type << ',' << c.name << ',' << (c.passed ? "true" : "false") << ','
                  << csv_num(c.value) << ',' << csv_num(c.bound) << '\n';
        }
        Json parameters{{"shape", shape_json(config.shape)},
                        {"sample_count", config.sample_count},
                        {"sample_seed", seed},
                        {"seed", exp_seed},
                        {"fill_distance", num(ctx.index->resolution())},
                        {"thresholds", to_json(ctx.cloud_thr)},
                        {"exact_thresholds", to_json(ctx.exact_thr)}};
        if (ctx.graph) parameters["connect_radius"] = num(ctx.graph->connect_radius());
        Json report{{"experiment", spec.name},
                    {"type", spec.type},
                    {"parameters", parameters},
                    {"config", spec.source},
                    {"result", art.result},
                    {"checks", checks},
                    {"passed", outcome.passed}};
        write_file(dir / (spec.name + ".report.json"), report.dump(2) + "\n");
        write_file(dir / (spec.name + ".csv"), art.csv);
        art.plot.title = spec.name + " (" + spec.type + ", " + config.shape.id() + ")";
        std::ostringstream svg;
        if (auto warning = emit_svg(svg, art.plot, art.slice)) log(spec.name + ": " + *warning);
        write_file(dir / (spec.name + ".svg"), svg.str());
        entry["report"] = spec.name + ".report.json";
        entry["csv"] = spec.name + ".csv";
        entry["svg"] = spec.name + ".svg";
      } catch (const Error& e) {
        outcome.error = "experiment '" + spec.name + "': " + e.what();
        entry["error"] = outcome.error;
        summary << spec.name << ',' << spec.type << ",error,false,,\n";
      }
      const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
      entry["passed"] = outcome.passed;
      entry["elapsed_seconds"] = elapsed;
      log(spec.name + ": " + (outcome.error.empty() ? (outcome.passed ? "passed" : "FAILED") : outcome.error) + " (" +
          std::to_string(elapsed) + " s)");
      entries.push_back(entry);
      result.experiments.push_back(std::move(outcome));
    }
    write_file(dir / "summary.csv", summary.str());
    manifest["summary"] = "summary.csv";
  }
  manifest["experiments"] = entries;
  manifest["passed"] = result.passed() && !result.errored();
  manifest["exit_code"] = result.exit_code();
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

}  // namespace medlab
