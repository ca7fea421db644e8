#include "medlab/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace medlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string point_text(const Vec& a) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < a.size(); ++i) out += (i ? ", " : "") + std::to_string(a[i]);
  return out + ")";
}

Vec unit_axis(const ProbeRegion& r) { return r.axis->normalized(); }

}  // namespace

ProbeRegion ProbeRegion::ball(Vec center, double radius) {
  ProbeRegion r;
  r.center = std::move(center);
  r.radius = radius;
  return r;
}

ProbeRegion ProbeRegion::annulus(Vec center, double inner_radius, double outer_radius) {
  ProbeRegion r = ball(std::move(center), outer_radius);
  r.inner_radius = inner_radius;
  return r;
}

ProbeRegion ProbeRegion::segment(Vec center, Vec axis, double half_length) {
  ProbeRegion r = ball(std::move(center), half_length);
  r.axis = std::move(axis);
  return r;
}

void ProbeRegion::validate() const {
  if (center.size() == 0) throw Error(Errc::invalid_region, "empty center");
  if (!(radius > 0.0)) throw Error(Errc::invalid_region, "radius must be positive");
  if (inner_radius < 0.0 || inner_radius >= radius) throw Error(Errc::invalid_region, "inner radius outside [0, radius)");
  if (axis) {
    if (axis->size() != center.size()) throw Error(Errc::invalid_region, "axis dimension mismatch");
    if (!(axis->norm() > 0.0)) throw Error(Errc::invalid_region, "zero axis");
    if (inner_radius > 0.0) throw Error(Errc::invalid_region, "segment regions have no inner radius");
  }
}

double ProbeRegion::distance_to(const Vec& x) const {
  if (axis) {
    const Vec a = unit_axis(*this);
    const double s = std::clamp((x - center).dot(a), -radius, radius);
    return (x - center - s * a).norm();
  }
  const double n = (x - center).norm();
  return std::max({0.0, n - radius, inner_radius - n});
}

bool ProbeRegion::contains(const Vec& x, double tol) const { return distance_to(x) <= tol; }

Box ProbeRegion::bounds() const {
  if (axis) {
    const Vec ext = radius * unit_axis(*this).cwiseAbs();
    return {center - ext, center + ext};
  }
  const Vec ext = Vec::Constant(center.size(), radius);
  return {center - ext, center + ext};
}

Vec ProbeRegion::sample(Rng& rng) const {
  if (axis) return center + rng.uniform(-radius, radius) * unit_axis(*this);
  for (;;) {
    Vec x = rng.in_ball(center, radius);
    if ((x - center).norm() >= inner_radius) return x;
  }
}

RegionCertificate certify_region(const ClosestPointOracle& oracle, ProbeRegion& region, const Thresholds& thr,
                                 const CertifyOptions& options) {
  region.validate();
  if (region.dim() != oracle.dim()) throw Error(Errc::invalid_region, "region dimension differs from the shape's");
  if (!(options.margin > 0.0)) throw Error(Errc::invalid_region, "margin must be positive");
  const std::size_t n = region.dim();

  GridSpec grid;
  grid.box = region.bounds().inflated(options.margin);
  grid.resolution.assign(n, options.resolution);
  if (region.axis) {
    const Vec a = unit_axis(region);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(a[i]) < 0.5) grid.resolution[i] = options.cross_resolution;
    }
  }
  grid.validate();
  const double step = grid.max_step();

  RegionCertificate cert;
  cert.scan = scan_medial(oracle, grid, thr, {}, true);
  const auto& flag = cert.scan.node_flag;
  auto& image = cert.scan.node_image;
  const std::size_t count = grid.node_count();
  for (std::size_t i = 0; i < count; ++i) {
    if (flag[i]) image[i] = Vec();
  }

  // Edges between unflagged nodes whose images jump.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t stride = 1;
  for (std::size_t k = 0; k < n; ++k) {
    const auto res = static_cast<std::size_t>(grid.resolution[k]);
    const double floor = std::max(thr.lambda, options.jump_factor * grid.step(k));
    for (std::size_t i = 0; i < count; ++i) {
      if ((i / stride) % res + 1 >= res) continue;
      const std::size_t j = i + stride;
      if (image[i].size() == 0 || image[j].size() == 0) continue;
      if ((image[i] - image[j]).norm() >= floor) edges.emplace_back(i, j);
    }
    stride *= res;
  }
  // Nearest edges first; an edge whose midpoint is farther than the best
  // jump found plus half a step cannot lower the infimum.
  std::vector<double> reach(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    reach[e] = region.distance_to(0.5 * (grid.node(edges[e].first) + grid.node(edges[e].second)));
  }
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return reach[a] < reach[b] || (reach[a] == reach[b] && a < b); });

  const double tol = std::max(1e-6 * step, 1e-12 * oracle.scale());
  double best = kInf;
  const std::size_t batch = 64;
  for (std::size_t at = 0; at < order.size() && reach[order[at]] - 0.5 * step < best; at += batch) {
    const std::size_t stop = std::min(order.size(), at + batch);
    std::vector<std::optional<Vec>> found(stop - at);
    const auto bn = static_cast<std::ptrdiff_t>(found.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < bn; ++k) {
      const auto& [i, j] = edges[order[at + static_cast<std::size_t>(k)]];
      const Vec u = grid.node(i);
      const Vec v = grid.node(j);
      try {
        found[k] = refine_jump(oracle, u, v, tol, thr).location;
      } catch (const Error& err) {
        if (err.code() != Errc::no_jump) found[k] = 0.5 * (u + v);
      }
    }
    for (auto& f : found) {
      if (!f) continue;
      best = std::min(best, region.distance_to(*f));
      cert.jump_points.push_back(std::move(*f));
    }
    cert.jump_edges = stop;
  }

  cert.min_medial_distance = kInf;
  auto account = [&](const Vec& x) {
    const double d = region.distance_to(x);
    if (d == 0.0) throw Error(Errc::invalid_region, "region contains medial point " + point_text(x));
    cert.min_medial_distance = std::min(cert.min_medial_distance, d);
  };
  for (const auto& s : cert.scan.samples) account(s.location);
  for (const auto& x : cert.jump_points) account(x);
  const double inf = std::min(cert.min_medial_distance, options.margin) - step;
  if (!(inf > 0.0)) {
    throw Error(Errc::invalid_region, "medial points within one grid step of the region");
  }
  region.delta = 0.5 * inf;

  std::vector<Vec> probes;
  double pad = 0.0;
  if (region.axis) {
    const int m = std::max(options.resolution, 2);
    const Vec a = unit_axis(region);
    for (int k = 0; k < m; ++k) probes.push_back(region.center + region.radius * (2.0 * k / (m - 1) - 1.0) * a);
    pad = region.radius / (m - 1);
  } else {
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
      Vec x = grid.node(i);
      if (region.contains(x)) probes.push_back(std::move(x));
    }
    probes.push_back(region.center + region.radius * Vec::Unit(n, 0));
    pad = 0.5 * step * std::sqrt(static_cast<double>(n));
  }
  const auto d = batch_distance(oracle, probes);
  region.sup_dist = *std::max_element(d.begin(), d.end()) + pad;
  return cert;
}

namespace {

struct Pair {
  Vec p;
  Vec q;
};

std::vector<Pair> draw_pairs(const ProbeRegion& region, std::size_t count, double floor, Rng& rng) {
  std::vector<Pair> pairs;
  pairs.reserve(count);
  const std::size_t n = region.dim();
  const double tol = 1e-12 * std::max(1.0, region.center.norm() + region.radius);
  while (pairs.size() < count) {
    const Vec p = region.sample(rng);
    for (int attempt = 0; attempt < 64; ++attempt) {
      const Vec u = region.axis ? Vec((rng.uniform() < 0.5 ? -1.0 : 1.0) * unit_axis(region)) : rng.unit_vector(n);
      const Vec q = p + rng.uniform(floor, region.delta) * u;
      if (region.contains(q, tol)) {
        pairs.push_back({p, q});
        break;
      }
    }
  }
  return pairs;
}

LipschitzReport lipschitz_impl(const ClosestPointOracle& oracle, const ProbeRegion& region, std::size_t pair_count,
                               std::uint64_t seed, const Thresholds& thr, bool parallel) {
  region.validate();
  if (!(region.delta > 0.0) || !(region.sup_dist >= 0.0)) {
    throw Error(Errc::invalid_region, "region is not certified (delta and sup_dist unset)");
  }
  if (pair_count == 0) throw Error(Errc::invalid_params, "pair_count must be positive");
  const double h = oracle.resolution();
  const double floor = std::max(4.0 * h, region.delta / 100.0);
  if (floor >= region.delta) {
    throw Error(Errc::invalid_region, "delta " + std::to_string(region.delta) + " is below 4 * fill");
  }

  Rng rng(seed);
  const auto pairs = draw_pairs(region, pair_count, floor, rng);
  const auto m = static_cast<std::ptrdiff_t>(pairs.size());
  std::vector<double> quotient(pairs.size(), 0.0);
  std::vector<double> on_set(pairs.size(), 0.0);
  std::vector<unsigned char> failed(pairs.size(), 0);

#pragma omp parallel for schedule(dynamic, 16) if (parallel)
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    const auto& [p, q] = pairs[k];
    const NearSet np = oracle.near_set(p, thr.epsilon);
    const NearSet nq = oracle.near_set(q, thr.epsilon);
    if (assess_near_set(np, p, thr).flag || assess_near_set(nq, q, thr).flag) {
      failed[k] = 1;
      continue;
    }
    quotient[k] = (representative(np) - representative(nq)).norm() / (p - q).norm();
    const Vec& px = np.members[np.anchor];
    const NearSet exact = oracle.near_set(q, 0.0);
    double worst = 0.0;
    for (const auto& xi : exact.members) worst = std::max(worst, (px - xi).norm());
    on_set[k] = worst / (px - q).norm();
  }

  LipschitzReport rep;
  rep.region = region;
  rep.thresholds = thr;
  rep.fill_distance = h;
  rep.seed = seed;
  rep.pair_count = pairs.size();
  rep.paper_bound = 2.0 * (region.delta + region.sup_dist) / region.delta;
  rep.min_pair_distance = kInf;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (failed[k]) {
      throw Error(Errc::invalid_region, "region meets the medial set near " + point_text(pairs[k].p));
    }
    rep.min_pair_distance = std::min(rep.min_pair_distance, (pairs[k].p - pairs[k].q).norm());
    if (quotient[k] > rep.empirical_quotient || rep.worst_p.size() == 0) {
      rep.empirical_quotient = quotient[k];
      rep.worst_p = pairs[k].p;
      rep.worst_q = pairs[k].q;
    }
    rep.on_set_quotient = std::max(rep.on_set_quotient, on_set[k]);
  }
  return rep;
}

}  // namespace

LipschitzReport lipschitz_quotient(const ClosestPointOracle& oracle, const ProbeRegion& region, std::size_t pair_count,
                                   std::uint64_t seed, const Thresholds& thr) {
  return lipschitz_impl(oracle, region, pair_count, seed, thr, true);
}

LipschitzReport lipschitz_quotient_serial(const ClosestPointOracle& oracle, const ProbeRegion& region,
                                          std::size_t pair_count, std::uint64_t seed, const Thresholds& thr) {
  return lipschitz_impl(oracle, region, pair_count, seed, thr, false);
}

OnSetReport on_set_quotient(const SpatialIndex& index, std::size_t pair_count, std::uint64_t seed, double max_offset) {
  if (index.size() == 0) throw Error(Errc::empty_cloud, "on-set check needs samples");
  const double floor = 4.0 * index.resolution();
  if (!(max_offset > floor)) throw Error(Errc::invalid_params, "max_offset must exceed 4 * fill");

  Rng rng(seed);
  std::vector<Pair> pairs;
  pairs.reserve(pair_count);
  for (std::size_t k = 0; k < pair_count; ++k) {
    const Vec& p = index.point(rng.index(index.size()));
    pairs.push_back({p, p + rng.uniform(floor, max_offset) * rng.unit_vector(index.dim())});
  }
  std::vector<double> quotient(pairs.size(), 0.0);
  const auto m = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    const NearSet ns = index.near_set(pairs[k].q, 0.0);
    double worst = 0.0;
    for (const auto& xi : ns.members) worst = std::max(worst, (pairs[k].p - xi).norm());
    quotient[k] = worst / (pairs[k].p - pairs[k].q).norm();
  }

  OnSetReport rep;
  rep.pair_count = pairs.size();
  rep.seed = seed;
  rep.min_pair_distance = kInf;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    rep.min_pair_distance = std::min(rep.min_pair_distance, (pairs[k].p - pairs[k].q).norm());
    if (quotient[k] > rep.max_quotient || rep.worst_p.size() == 0) {
      rep.max_quotient = quotient[k];
      rep.worst_p = pairs[k].p;
      rep.worst_q = pairs[k].q;
    }
  }
  return rep;
}

namespace {

std::size_t snap_on_shape(const GeodesicGraph& graph, const Vec& p) {
  const auto& index = graph.index();
  const std::size_t v = graph.snap(p);
  if ((index.point(v) - p).norm() > 2.0 * index.resolution() + 1e-12 * index.scale()) {
    throw Error(Errc::not_on_shape, point_text(p) + " is farther than 2 * fill from the cloud");
  }
  return v;
}

}  // namespace

LocalLneSample local_lne_constant(const GeodesicGraph& graph, const Vec& p, double radius, std::size_t source_count,
                                  std::uint64_t seed) {
  if (!(radius > 0.0)) throw Error(Errc::invalid_params, "radius must be positive");
  const auto& index = graph.index();
  const std::uint32_t comp = graph.component(snap_on_shape(graph, p));

  std::vector<std::size_t> ball;
  for (auto i : index.within(p, radius)) {
    if (graph.component(i) == comp) ball.push_back(i);
  }
  if (ball.size() < 2) {
    throw Error(Errc::insufficient_points, "B" + point_text(p) + " of radius " + std::to_string(radius) +
                                               " holds " + std::to_string(ball.size()) + " connected samples");
  }
  std::vector<std::size_t> shell;
  for (auto i : ball) {
    if ((index.point(i) - p).norm() >= 0.5 * radius) shell.push_back(i);
  }
  if (shell.empty()) throw Error(Errc::insufficient_points, "no samples in the outer half of the ball");

  auto norm_of = [&](std::size_t i) { return (index.point(i) - p).norm(); };
  std::vector<std::size_t> sources;
  sources.push_back(*std::min_element(shell.begin(), shell.end(),
                                      [&](auto a, auto b) { return norm_of(a) < norm_of(b); }));
  sources.push_back(*std::max_element(shell.begin(), shell.end(),
                                      [&](auto a, auto b) { return norm_of(a) < norm_of(b); }));
  std::vector<std::size_t> pool = shell;
  std::shuffle(pool.begin(), pool.end(), Rng(seed).engine());
  pool.resize(std::min(pool.size(), source_count));
  sources.insert(sources.end(), pool.begin(), pool.end());
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());

  const double floor = 4.0 * index.resolution();
  struct Best {
    double ratio = 0.0;
    std::size_t target = 0;
    double inner = 0.0;
  };
  std::vector<Best> best(sources.size());
  const auto m = static_cast<std::ptrdiff_t>(sources.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    const std::size_t s = sources[k];
    const auto dist = graph.distances_from(s, ball);
    for (std::size_t j = 0; j < ball.size(); ++j) {
      const double outer = (index.point(s) - index.point(ball[j])).norm();
      if (outer < floor || !std::isfinite(dist[j])) continue;
      const double ratio = dist[j] / outer;
      if (ratio > best[k].ratio) best[k] = {ratio, ball[j], dist[j]};
    }
  }

  LocalLneSample out;
  out.radius = radius;
  out.sources = sources.size();
  out.targets = ball.size();
  for (std::size_t k = 0; k < sources.size(); ++k) {
    if (best[k].ratio > out.constant) {
      out.constant = best[k].ratio;
      out.witness_a = index.point(sources[k]);
      out.witness_b = index.point(best[k].target);
      out.inner = best[k].inner;
      out.outer = (out.witness_a - out.witness_b).norm();
    }
  }
  if (out.constant == 0.0) {
    throw Error(Errc::insufficient_points, "no pair in the ball is at least 4 * fill apart");
  }
  return out;
}

std::string_view to_string(LneVerdict verdict) {
  switch (verdict) {
    case LneVerdict::bounded: return "bounded";
    case LneVerdict::diverging: return "diverging";
    case LneVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

LneVerdict classify_lne(const std::vector<double>& c) {
  if (c.size() < 2) return LneVerdict::inconclusive;
  bool monotone = true;
  for (std::size_t i = 1; i < c.size(); ++i) monotone = monotone && c[i] >= c[i - 1];
  if (monotone && c.back() >= 2.0 * c.front()) return LneVerdict::diverging;
  const double prev = c[c.size() - 2];
  if (std::abs(c.back() - prev) <= 0.2 * prev) return LneVerdict::bounded;
  return LneVerdict::inconclusive;
}

LneReport estimate_lne_verdict(const GeodesicGraph& graph, const Vec& p, const std::vector<double>& radii,
                               std::size_t source_count, std::uint64_t seed) {
  if (radii.size() < 2) throw Error(Errc::invalid_params, "need at least two radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] < radii[i - 1]))) {
      throw Error(Errc::invalid_params, "radii must be positive and strictly decreasing");
    }
  }
  LneReport rep;
  rep.point = p;
  rep.radii = radii;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    rep.samples.push_back(local_lne_constant(graph, p, radii[i], source_count, seed + i));
    rep.constants.push_back(rep.samples.back().constant);
  }
  rep.verdict = classify_lne(rep.constants);
  return rep;
}

TheoremVerdict verify_theorem(const GeodesicGraph& graph, const Vec& p, const TheoremConfig& config) {
  const auto& index = graph.index();
  const std::uint32_t comp = graph.component(snap_on_shape(graph, p));

  TheoremVerdict out;
  out.point = p;
  try {
    out.lne = estimate_lne_verdict(graph, p, config.radii, config.source_count, config.seed);
  } catch (const Error& e) {
    if (e.code() != Errc::insufficient_points) throw;
    out.lne = LneReport{};
    out.lne.point = p;
    out.lne.radii = config.radii;
    out.lne.verdict = LneVerdict::inconclusive;
    out.lne.note = e.what();
  }

  const Thresholds thr = Thresholds::defaults_for(index);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  out.medial_approach = !config.radii.empty();
  for (double r : config.radii) {
    const auto scan = scan_medial(index, GridSpec::ball(p, r, config.scan_resolution), thr);
    BallScan b;
    b.radius = r;
    b.flagged = scan.flagged();
    b.nearest_medial = scan.distance_to_samples(p);
    if (out.balls.empty()) out.medial_samples = scan.samples;
    if (b.flagged == 0) {
      out.medial_approach = false;
      std::vector<std::size_t> ball;
      for (auto i : index.within(p, r)) {
        if (graph.component(i) == comp) ball.push_back(i);
      }
      for (int k = 0; k < config.rectifiable_pairs && ball.size() >= 2; ++k) {
        const Vec& x = index.point(ball[rng.index(ball.size())]);
        const Vec& y = index.point(ball[rng.index(ball.size())]);
        ++b.paths_tried;
        try {
          const auto path = project_segment(index, x, y, config.projection_steps, thr);
          if (std::isfinite(path.length)) {
            ++b.paths_ok;
            b.longest_path = std::max(b.longest_path, path.length);
          }
        } catch (const Error& e) {
          if (e.code() != Errc::medial_crossing) throw;
        }
      }
      out.rectifiable = out.rectifiable && b.paths_ok == b.paths_tried;
    }
    out.balls.push_back(b);
  }
  out.consistent = !(out.lne.verdict == LneVerdict::diverging && !out.medial_approach);
  return out;
}

bool ratios_diverge(const std::vector<double>& r) {
  if (r.size() < 2 || !(r.back() >= 2.0 * r.front())) return false;
  for (std::size_t i = std::max<std::size_t>(1, r.size() / 2); i < r.size(); ++i) {
    if (!(r[i] >= r[i - 1])) return false;
  }
  return true;
}

ConjectureTrace conjecture_trace(const GeodesicGraph& graph, const Vec& p, const std::vector<Vec>& medial_points,
                                 const Thresholds& thr) {
  const auto& index = graph.index();
  ConjectureTrace out;
  out.point = p;
  for (const auto& xi : medial_points) {
    const NearSet ns = index.near_set(xi, thr.epsilon);
    const auto mv = assess_near_set(ns, xi, thr);
    if (!mv.flag) {
      ++out.skipped;
      continue;
    }
    const Vec& a = ns.members[mv.witness_a];
    const Vec& b = ns.members[mv.witness_b];
    double inner = kInf;
    const std::size_t va = index.nearest(a);
    const std::size_t vb = index.nearest(b);
    if (graph.component(va) == graph.component(vb)) graph.shortest_path(va, vb, &inner);
    const double outer = (a - b).norm();
    out.medial_points.push_back(xi);
    out.witness_pairs.push_back({a, b});
    out.inner.push_back(inner);
    out.outer.push_back(outer);
    out.ratios.push_back(inner / outer);
  }
  out.vacuous = out.ratios.empty();
  out.diverges = ratios_diverge(out.ratios);
  return out;
}

ConjectureTrace conjecture_probe(const GeodesicGraph& graph, const Vec& p, double radius, std::size_t count,
                                 int resolution, const Thresholds& thr) {
  if (count == 0) throw Error(Errc::invalid_params, "count must be positive");
  const auto scan = scan_medial(graph.index(), GridSpec::ball(p, radius, resolution), thr);
  std::vector<std::pair<double, Vec>> found;
  for (const auto& s : scan.samples) {
    const double d = (s.location - p).norm();
    if (d > 0.0) found.emplace_back(d, s.location);
  }
  if (found.empty()) return conjecture_trace(graph, p, {}, thr);
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : lex_less(a.second, b.second);
  });

  const double hi = found.front().first;
  const double lo = found.back().first;
  const std::size_t take = std::min(count, found.size());
  std::vector<unsigned char> used(found.size(), 0);
  std::vector<std::size_t> picks;
  for (std::size_t k = 0; k < take; ++k) {
    const double f = take == 1 ? 0.0 : static_cast<double>(k) / (take - 1);
    const double target = std::log(hi) + f * (std::log(lo) - std::log(hi));
    std::size_t pick = found.size();
    for (std::size_t i = 0; i < found.size(); ++i) {
      if (used[i]) continue;
      if (pick == found.size() ||
          std::abs(std::log(found[i].first) - target) < std::abs(std::log(found[pick].first) - target)) {
        pick = i;
      }
    }
    used[pick] = 1;
    picks.push_back(pick);
  }
  std::sort(picks.begin(), picks.end());
  std::vector<Vec> points;
  for (auto i : picks) points.push_back(found[i].second);
  return conjecture_trace(graph, p, points, thr);
}

}  // namespace medlab
