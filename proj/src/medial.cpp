#include "medlab/medial.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace medlab {

namespace {

// Grid step above this multiple of the fill distance can step over thin
// medial bands entirely.
constexpr double kCoarseGridFactor = 100.0;

struct NodeResult {
  double spread = std::numeric_limits<double>::quiet_NaN();
  bool flag = false;
  MedialFlag detail;
};

NodeResult evaluate_node(const ClosestPointOracle& oracle, const GridSpec& grid, const Thresholds& thr,
                         std::size_t flat) {
  NodeResult r;
  const Vec x = grid.node(flat);
  if (!grid.in_mask(x)) return r;
  r.detail = is_medial(oracle, x, thr);
  r.spread = r.detail.spread;
  r.flag = r.detail.flag;
  return r;
}

MedialScanReport assemble(const ClosestPointOracle& oracle, const GridSpec& grid, const Thresholds& thr,
                          const std::map<std::string, Vec>& probes, std::vector<NodeResult>& results,
                          bool keep_images) {
  MedialScanReport report;
  report.grid = grid;
  report.thresholds = thr;
  report.fill_distance = oracle.resolution();
  report.node_spread.resize(results.size());
  report.node_flag.resize(results.size());
  if (keep_images) report.node_image.resize(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (keep_images) report.node_image[i] = std::move(results[i].detail.image);
    report.node_spread[i] = results[i].spread;
    report.node_flag[i] = results[i].flag ? 1 : 0;
    if (!results[i].flag) continue;
    MedialSample s;
    s.location = grid.node(i);
    s.spread = results[i].detail.spread;
    s.witness_a = std::move(results[i].detail.witness_a);
    s.witness_b = std::move(results[i].detail.witness_b);
    s.method = MedialMethod::grid_spread;
    report.samples.push_back(std::move(s));
  }
  for (const auto& [name, p] : probes) report.min_distance_to[name] = report.distance_to_samples(p);
  const double h = oracle.resolution();
  if (h > 0.0 && grid.max_step() > kCoarseGridFactor * h) {
    report.warnings.push_back("grid step " + std::to_string(grid.max_step()) + " exceeds " +
                              std::to_string(kCoarseGridFactor) + " x fill distance " + std::to_string(h));
  }
  return report;
}

void check_thresholds(const Thresholds& thr) {
  if (!(thr.epsilon > 0.0) || !(thr.lambda > 0.0)) {
    throw Error(Errc::invalid_params, "epsilon and lambda must be positive");
  }
}

}  // namespace

std::string_view to_string(MedialMethod method) {
  return method == MedialMethod::grid_spread ? "grid_spread" : "jump_bisection";
}

MedialFlag is_medial(const ClosestPointOracle& oracle, const Vec& a, const Thresholds& thr) {
  check_thresholds(thr);
  const auto ns = oracle.near_set(a, thr.epsilon);
  MedialFlag out;
  out.distance = ns.distance;
  out.spread = ns.spread;
  out.image = representative(ns);
  if (ns.distance <= 1e-12 * oracle.scale()) return out;
  const auto mv = assess_near_set(ns, a, thr);
  out.flag = mv.flag;
  out.separation = mv.separation;
  if (mv.flag) {
    out.witness_a = ns.members[mv.witness_a];
    out.witness_b = ns.members[mv.witness_b];
  }
  return out;
}

// ---------------------------------------------------------------------------
// GridSpec
// ---------------------------------------------------------------------------

GridSpec GridSpec::uniform(const Box& box, int resolution) {
  GridSpec g;
  g.box = box;
  g.resolution.assign(static_cast<std::size_t>(box.dim()), resolution);
  return g;
}

GridSpec GridSpec::ball(const Vec& center, double radius, int resolution) {
  GridSpec g;
  g.box = Box{center.array() - radius, center.array() + radius};
  g.resolution.assign(static_cast<std::size_t>(center.size()), resolution);
  g.mask_center = center;
  g.mask_radius = radius;
  return g;
}

void GridSpec::validate() const {
  if (static_cast<std::size_t>(box.dim()) != resolution.size() || resolution.empty()) {
    throw Error(Errc::invalid_params, "grid resolution must list one entry per box axis");
  }
  for (std::size_t k = 0; k < resolution.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    if (resolution[k] < 2) throw Error(Errc::invalid_params, "grid resolution must be at least 2 per axis");
    if (!(box.hi[i] >= box.lo[i])) throw Error(Errc::invalid_params, "grid box is empty");
  }
  if (mask_center && !(mask_radius > 0.0)) throw Error(Errc::invalid_params, "mask radius must be positive");
}

std::size_t GridSpec::node_count() const {
  std::size_t n = 1;
  for (int r : resolution) n *= static_cast<std::size_t>(r);
  return n;
}

Vec GridSpec::node(std::size_t flat) const {
  Vec x(static_cast<Eigen::Index>(resolution.size()));
  for (std::size_t k = 0; k < resolution.size(); ++k) {
    const auto r = static_cast<std::size_t>(resolution[k]);
    const auto i = static_cast<double>(flat % r);
    flat /= r;
    const auto ax = static_cast<Eigen::Index>(k);
    const double mid = 0.5 * (box.lo[ax] + box.hi[ax]);
    const double half = 0.5 * (box.hi[ax] - box.lo[ax]);
    const double m = static_cast<double>(r - 1);
    x[ax] = mid + half * (2.0 * i - m) / m;
  }
  return x;
}

bool GridSpec::in_mask(const Vec& x) const {
  if (!mask_center) return true;
  return (x - *mask_center).norm() <= mask_radius * (1.0 + 1e-12);
}

double GridSpec::step(std::size_t axis) const {
  const auto ax = static_cast<Eigen::Index>(axis);
  return (box.hi[ax] - box.lo[ax]) / static_cast<double>(resolution[axis] - 1);
}

double GridSpec::max_step() const {
  double s = 0.0;
  for (std::size_t k = 0; k < resolution.size(); ++k) s = std::max(s, step(k));
  return s;
}

double MedialScanReport::distance_to_samples(const Vec& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) best = std::min(best, (s.location - x).norm());
  return best;
}

// ---------------------------------------------------------------------------
// Scans
// ---------------------------------------------------------------------------

MedialScanReport scan_medial(const ClosestPointOracle& oracle, const GridSpec& grid, const Thresholds& thr,
                             const std::map<std::string, Vec>& probes, bool keep_images) {
  grid.validate();
  check_thresholds(thr);
  std::vector<NodeResult> results(grid.node_count());
  const auto n = static_cast<std::ptrdiff_t>(results.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    results[static_cast<std::size_t>(i)] = evaluate_node(oracle, grid, thr, static_cast<std::size_t>(i));
  }
  return assemble(oracle, grid, thr, probes, results, keep_images);
}

MedialScanReport scan_medial_serial(const ClosestPointOracle& oracle, const GridSpec& grid, const Thresholds& thr,
                                    const std::map<std::string, Vec>& probes, bool keep_images) {
  grid.validate();
  check_thresholds(thr);
  std::vector<NodeResult> results;
  results.reserve(grid.node_count());
  for (std::size_t i = 0; i < grid.node_count(); ++i) results.push_back(evaluate_node(oracle, grid, thr, i));
  return assemble(oracle, grid, thr, probes, results, keep_images);
}

// ---------------------------------------------------------------------------
// Jump bisection
// ---------------------------------------------------------------------------

namespace {

struct Probe {
  bool medial = false;
  Vec image;
};

Probe probe_at(const ClosestPointOracle& oracle, const Vec& x, const Thresholds& thr) {
  const auto ns = oracle.near_set(x, thr.epsilon);
  Probe p;
  p.medial = ns.distance > 1e-12 * oracle.scale() && assess_near_set(ns, x, thr).flag;
  p.image = representative(ns);
  return p;
}

// Greedy descent into the half with the larger image jump. True when a jump
// of size >= lambda survives down to tol, or a medial midpoint is met.
bool jump_persists(const ClosestPointOracle& oracle, Vec a, Vec b, Vec ma, Vec mb, double tol,
                   const Thresholds& thr) {
  while ((b - a).norm() > tol) {
    const Vec c = 0.5 * (a + b);
    const auto pc = probe_at(oracle, c, thr);
    if (pc.medial) return true;
    const double j1 = (ma - pc.image).norm();
    const double j2 = (pc.image - mb).norm();
    if (std::max(j1, j2) < thr.lambda) return false;
    if (j1 >= j2) {
      b = c;
      mb = pc.image;
    } else {
      a = c;
      ma = pc.image;
    }
  }
  return (ma - mb).norm() >= thr.lambda;
}

}  // namespace

MedialSample refine_jump(const ClosestPointOracle& oracle, const Vec& u, const Vec& v, double tol,
                         const Thresholds& thr) {
  check_thresholds(thr);
  if (!(tol > 0.0)) throw Error(Errc::invalid_params, "bisection tolerance must be positive");
  if (u.size() != v.size()) throw Error(Errc::invalid_params, "segment endpoints differ in dimension");
  const auto pu = probe_at(oracle, u, thr);
  const auto pv = probe_at(oracle, v, thr);
  if (pu.medial || pv.medial) throw Error(Errc::invalid_params, "segment endpoint is flagged medial");
  if ((pu.image - pv.image).norm() < thr.lambda) {
    throw Error(Errc::no_jump, "closest-point images of the endpoints differ by less than lambda");
  }

  Vec a = u;
  Vec b = v;
  Vec ma = pu.image;
  Vec mb = pv.image;
  MedialSample out;
  out.method = MedialMethod::jump_bisection;
  std::optional<Vec> pinned;

  while ((b - a).norm() > tol) {
    ++out.iterations;
    const Vec c = 0.5 * (a + b);
    if (pinned) {
      // Bracket halves around the pinned medial point.
      const Vec half = 0.25 * (b - a);
      a = c - half;
      b = c + half;
      continue;
    }
    const auto pc = probe_at(oracle, c, thr);
    if (pc.medial) {
      pinned = c;
      const auto ns = oracle.near_set(c, thr.epsilon);
      const auto mv = assess_near_set(ns, c, thr);
      ma = ns.members[mv.witness_a];
      mb = ns.members[mv.witness_b];
      const Vec half = 0.25 * (b - a);
      a = c - half;
      b = c + half;
      continue;
    }
    const double j1 = (ma - pc.image).norm();
    const double j2 = (pc.image - mb).norm();
    if (std::max(j1, j2) < thr.lambda) {
      throw Error(Errc::no_jump, "closest-point map varies continuously across the segment");
    }
    const bool left = j1 >= j2;
    if (std::min(j1, j2) >= thr.lambda) {
      const bool other = left ? jump_persists(oracle, c, b, pc.image, mb, tol, thr)
                              : jump_persists(oracle, a, c, ma, pc.image, tol, thr);
      if (other) throw Error(Errc::multiple_jumps, "both halves of the bracket carry a jump; shorten the segment");
    }
    if (left) {
      b = c;
      mb = pc.image;
    } else {
      a = c;
      ma = pc.image;
    }
  }

  if (!pinned && (ma - mb).norm() < thr.lambda) {
    throw Error(Errc::no_jump, "jump vanished under refinement");
  }
  out.location = pinned ? *pinned : Vec(0.5 * (a + b));
  out.bracket = (b - a).norm();
  out.spread = (ma - mb).norm();
  out.witness_a = ma;
  out.witness_b = mb;
  return out;
}

void write_scan_csv(std::ostream& out, const MedialScanReport& report) {
  const auto dim = report.grid.dim();
  for (std::size_t k = 0; k < dim; ++k) out << 'x' << k << ',';
  out << "spread,flag\n";
  out.precision(12);
  for (std::size_t i = 0; i < report.node_spread.size(); ++i) {
    if (std::isnan(report.node_spread[i])) continue;
    const Vec x = report.grid.node(i);
    for (Eigen::Index k = 0; k < x.size(); ++k) out << x[k] << ',';
    out << report.node_spread[i] << ',' << static_cast<int>(report.node_flag[i]) << '\n';
  }
}

}  // namespace medlab
