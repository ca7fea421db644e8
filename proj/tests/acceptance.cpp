// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ...]   (no arguments runs all nine)

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "medlab/experiment.hpp"

using namespace medlab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    if (cond) return;
    pass = false;
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    if (!detail.empty()) detail += "; ";
    detail += buf;
  }
  void note(const char* fmt, ...) __attribute__((format(printf, 2, 3))) {
    if (!pass) return;
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    if (!detail.empty()) detail += "; ";
    detail += buf;
  }
};

std::unique_ptr<Shape> shape_of(ShapeKind kind, std::map<std::string, double> params = {}) {
  ShapeSpec s;
  s.kind = kind;
  s.params = std::move(params);
  return make_shape(s);
}

const std::vector<ShapeKind> kCatalog = {ShapeKind::circle,     ShapeKind::two_points, ShapeKind::cusp,
                                         ShapeKind::half_helix, ShapeKind::full_helix, ShapeKind::cone};

// Cusp branch arc length from the tip to parameter t.
double cusp_arc(double t) { return 8.0 / 27.0 * (std::pow(1.0 + 2.25 * t, 1.5) - 1.0); }

Vec image(const ClosestPointOracle& oracle, const Vec& x) {
  const auto ns = oracle.near_set(x, 0.0);
  return ns.members[ns.anchor];
}

// ---------------------------------------------------------------------------

Outcome gradient_suite() {
  Outcome out;
  constexpr int kTarget = 500;
  int accepted = 0, rejected = 0;
  double worst_norm = 0.0, worst_fd = 0.0;
  Rng rng(2024);
  for (int round = 0; accepted < kTarget && round < 100 * kTarget; ++round) {
    const auto shape = shape_of(kCatalog[round % kCatalog.size()]);
    const auto thr = Thresholds::defaults_for(*shape);
    const double scale = shape->scale();
    const double h = 1e-5 * scale;
    Box box = shape->bounds();
    box.lo.array() -= 0.25 * scale;
    box.hi.array() += 0.25 * scale;
    const Vec a = rng.in_box(box);
    const double d = shape->distance(a);
    // Off the shape, off the medial set, and no jump of m inside the stencil.
    bool ok = d >= 1e-3 * scale && !is_medial(*shape, a, thr).flag;
    const Vec m = ok ? image(*shape, a) : Vec();
    for (Eigen::Index k = 0; ok && k < a.size(); ++k) {
      for (double s : {-1.0, 1.0}) {
        Vec x = a;
        x[k] += s * h;
        ok = ok && (image(*shape, x) - m).norm() <= 100.0 * h;
      }
    }
    if (!ok) {
      ++rejected;
      continue;
    }
    ++accepted;
    const Vec g = grad_distance(*shape, a, thr);
    Vec fd(a.size());
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      Vec xp = a, xm = a;
      xp[k] += h;
      xm[k] -= h;
      fd[k] = (shape->distance(xp) - shape->distance(xm)) / (2.0 * h);
    }
    worst_norm = std::max(worst_norm, std::abs(g.norm() - 1.0));
    worst_fd = std::max(worst_fd, (fd - g).norm() / g.norm());
  }
  out.require(accepted == kTarget, "only %d probe points accepted", accepted);
  out.require(worst_norm <= 1e-6, "max | |grad| - 1 | = %.3g > 1e-6", worst_norm);
  out.require(worst_fd <= 1e-4, "max FD relative error %.3g > 1e-4", worst_fd);
  out.note("%d points (%d rejected as near-medial), max | |grad| - 1 | = %.2e, max FD rel err = %.2e", accepted,
           rejected, worst_norm, worst_fd);
  return out;
}

Outcome helix_blowup() {
  Outcome out;
  const auto helix = shape_of(ShapeKind::half_helix);
  const auto thr = Thresholds::defaults_for(*helix);
  const Vec dir = make_vec({0.0, 0.0, 1.0});
  double prev = 0.0;
  std::string values;
  for (double t : {1.0, 0.25, 0.04, 0.01}) {
    const double norm = jacobian_along_line(*helix, Vec::Zero(3), dir, t, 1e-3 * t, thr).norm();
    // m(0, 0, t) = (cos sqrt t, sin sqrt t, t), so |m'| = sqrt(1 + 1/(4t)).
    const double oracle = std::sqrt(1.0 + 1.0 / (4.0 * t));
    out.require(std::abs(norm - oracle) <= 0.02 * oracle, "t=%g: |J| = %.4f vs %.4f", t, norm, oracle);
    out.require(norm > prev, "t=%g: norms not increasing", t);
    prev = norm;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%.4f/%.4f", values.empty() ? "" : ", ", norm, oracle);
    values += buf;
  }
  out.note("|J| vs oracle at t=1,0.25,0.04,0.01: %s", values.c_str());
  return out;
}

struct RegionCase {
  const char* label;
  ShapeKind kind;
  ProbeRegion region;
  CertifyOptions options;
};

Outcome lipschitz_suite() {
  Outcome out;
  CertifyOptions annulus_opt;
  annulus_opt.resolution = 501;
  annulus_opt.margin = 2.5;
  CertifyOptions helix_opt;
  helix_opt.resolution = 121;
  helix_opt.cross_resolution = 21;
  helix_opt.margin = 1e-3;
  const std::vector<RegionCase> cases = {
      {"circle annulus 2..3", ShapeKind::circle, ProbeRegion::annulus(Vec::Zero(2), 2.0, 3.0), annulus_opt},
      {"circle B((2.5,0),0.4)", ShapeKind::circle, ProbeRegion::ball(make_vec({2.5, 0.0}), 0.4), {}},
      {"circle B((0.5,0.2),0.2)", ShapeKind::circle, ProbeRegion::ball(make_vec({0.5, 0.2}), 0.2), {}},
      {"circle B((-1.5,1),0.3)", ShapeKind::circle, ProbeRegion::ball(make_vec({-1.5, 1.0}), 0.3), {}},
      {"two_points B((2,0),0.4)", ShapeKind::two_points, ProbeRegion::ball(make_vec({2.0, 0.0}), 0.4), {}},
      {"two_points B((-0.5,0.8),0.3)", ShapeKind::two_points, ProbeRegion::ball(make_vec({-0.5, 0.8}), 0.3), {}},
      {"cusp B((0.5,0.5),0.1)", ShapeKind::cusp, ProbeRegion::ball(make_vec({0.5, 0.5}), 0.1), {}},
      {"cusp B((0.6,0.15),0.05)", ShapeKind::cusp, ProbeRegion::ball(make_vec({0.6, 0.15}), 0.05), {}},
      {"cusp B((0.3,-0.3),0.05)", ShapeKind::cusp, ProbeRegion::ball(make_vec({0.3, -0.3}), 0.05), {}},
      {"half_helix axis z in [0.01,0.02]", ShapeKind::half_helix,
       ProbeRegion::segment(make_vec({0.0, 0.0, 0.015}), make_vec({0.0, 0.0, 1.0}), 0.005), helix_opt},
  };
  int certified = 0;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const auto shape = shape_of(c.kind);
    const auto thr = Thresholds::defaults_for(*shape);
    ProbeRegion region = c.region;
    try {
      certify_region(*shape, region, thr, c.options);
    } catch (const Error& e) {
      out.require(false, "%s: certification failed: %s", c.label, e.what());
      continue;
    }
    ++certified;
    // delta must not exceed the closed-form medial distance anywhere in the region.
    Rng rng(500 + i);
    for (int k = 0; k < 200; ++k) {
      const Vec x = region.sample(rng);
      if (const auto md = shape->medial_distance(x)) {
        out.require(*md >= region.delta, "%s: analytic medial distance %.3g < delta %.3g", c.label, *md, region.delta);
      }
    }
    const auto rep = lipschitz_quotient(*shape, region, 10000, 77 + i, thr);
    out.require(rep.pair_count == 10000, "%s: %zu pairs", c.label, rep.pair_count);
    out.require(rep.empirical_quotient <= rep.paper_bound, "%s: quotient %.4f > bound %.4f", c.label,
                rep.empirical_quotient, rep.paper_bound);
    worst_ratio = std::max(worst_ratio, rep.empirical_quotient / rep.paper_bound);
    if (i == 0) {
      out.require(std::abs(rep.empirical_quotient - 0.5) <= 0.05, "annulus quotient %.4f not 0.5 +- 0.05",
                  rep.empirical_quotient);
      out.require(std::abs(rep.paper_bound - 6.0) <= 0.02 * 6.0, "annulus bound %.4f not 6", rep.paper_bound);
      // Radial projection: |p/|p| - q/|q|| / |p - q| <= 1 / min(|p|, |q|).
      const Vec& p = rep.worst_p;
      const Vec& q = rep.worst_q;
      const double direct = (p / p.norm() - q / q.norm()).norm() / (p - q).norm();
      out.require(std::abs(direct - rep.empirical_quotient) <= 1e-9, "annulus worst pair recomputes to %.6f", direct);
      out.note("annulus quotient %.4f vs bound %.4f", rep.empirical_quotient, rep.paper_bound);
    }
  }
  out.require(certified == 10, "%d of 10 regions certified", certified);
  out.note("%d regions x 1e4 pairs, max quotient/bound = %.3f", certified, worst_ratio);
  return out;
}

Outcome on_set_suite() {
  Outcome out;
  constexpr std::size_t kPairs = 10000;
  double worst = 0.0;
  for (auto kind : {ShapeKind::circle, ShapeKind::cusp, ShapeKind::half_helix, ShapeKind::cone}) {
    const auto shape = shape_of(kind);
    const SpatialIndex index(sample_shape(*shape, 20000, 4));
    const auto rep = on_set_quotient(index, kPairs, 31, 0.5 * index.scale());
    out.require(rep.pair_count == kPairs, "%s: %zu pairs", std::string(to_string(kind)).c_str(), rep.pair_count);
    out.require(rep.min_pair_distance >= 4.0 * index.resolution(), "%s: pair closer than 4 fill",
                std::string(to_string(kind)).c_str());
    out.require(rep.max_quotient <= 2.0 * (1.0 + 1e-2), "%s: quotient %.4f", std::string(to_string(kind)).c_str(),
                rep.max_quotient);
    // Brute-force recomputation of the worst pair over every sample.
    const Vec& p = rep.worst_p;
    const Vec& q = rep.worst_q;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < index.size(); ++i) best = std::min(best, (index.point(i) - q).norm());
    double far = 0.0;
    for (std::size_t i = 0; i < index.size(); ++i) {
      if ((index.point(i) - q).norm() <= best) far = std::max(far, (index.point(i) - p).norm());
    }
    const double direct = far / (p - q).norm();
    out.require(std::abs(direct - rep.max_quotient) <= 1e-9, "%s: worst pair recomputes to %.6f vs %.6f",
                std::string(to_string(kind)).c_str(), direct, rep.max_quotient);
    worst = std::max(worst, rep.max_quotient);
  }
  out.note("4 shapes x 1e4 pairs, max quotient %.4f <= 2.02", worst);
  return out;
}

Outcome medial_detection() {
  Outcome out;
  const Box square{make_vec({-0.5, -0.5}), make_vec({0.5, 0.5})};
  {
    const auto shape = shape_of(ShapeKind::circle);
    const SpatialIndex index(sample_shape(*shape, 10000, 1));
    const auto grid = GridSpec::uniform(square, 101);
    const auto rep = scan_medial(index, grid, Thresholds::defaults_for(index));
    out.require(rep.flagged() > 0, "circle scan flagged nothing");
    double far = 0.0;
    for (const auto& s : rep.samples) far = std::max(far, s.location.norm());
    out.require(far <= 2.0 * grid.max_step() + 1e-12, "circle: flagged node %.4f from origin", far);
    out.note("circle: %zu flagged, farthest %.4f (2 steps = %.4f)", rep.flagged(), far, 2.0 * grid.max_step());
  }
  {
    const auto shape = shape_of(ShapeKind::two_points);
    const SpatialIndex index(sample_shape(*shape, 2, 1));
    const auto grid = GridSpec::uniform(Box{make_vec({-1.0, -1.0}), make_vec({1.0, 1.0})}, 101);
    const auto rep = scan_medial(index, grid, Thresholds::defaults_for(index));
    out.require(rep.flagged() > 0, "two_points scan flagged nothing");
    double far = 0.0;
    for (const auto& s : rep.samples) far = std::max(far, std::abs(s.location[0]));
    out.require(far <= grid.step(0) + 1e-12, "two_points: flagged node %.4f from x=0", far);
    out.note("two_points: %zu flagged, max |x| %.4f", rep.flagged(), far);
  }
  struct Jump {
    ShapeKind kind;
    Vec u, v, expect;
  };
  const std::vector<Jump> jumps = {
      {ShapeKind::two_points, make_vec({-0.7, 0.3}), make_vec({0.8, 0.3}), make_vec({0.0, 0.3})},
      {ShapeKind::two_points, make_vec({-0.2, -0.9}), make_vec({0.9, -0.4}), Vec()},
      {ShapeKind::circle, make_vec({-0.5, -0.2}), make_vec({0.5, 0.2}), Vec::Zero(2)},
      {ShapeKind::cusp, make_vec({0.3, 0.25}), make_vec({0.3, -0.25}), make_vec({0.3, 0.0})},
      {ShapeKind::cusp, make_vec({0.1, 0.05}), make_vec({0.25, -0.1}), Vec()},
      {ShapeKind::cone, make_vec({-0.3, 0.0, 1.0}), make_vec({0.4, 0.0, 1.0}), make_vec({0.0, 0.0, 1.0})},
  };
  int worst_iter = 0;
  double worst_err = 0.0;
  for (const auto& j : jumps) {
    const auto shape = shape_of(j.kind);
    // Analytic crossing: the point of [u, v] on the known medial set.
    Vec expect = j.expect;
    if (expect.size() == 0) {
      double lo = 0.0, hi = 1.0;
      auto side = [&](double s) {
        const Vec x = j.u + s * (j.v - j.u);
        // Bisector x = 0 of the two points; positive x-axis for the cusp.
        return j.kind == ShapeKind::two_points ? x[0] > 0.0 : x[1] < 0.0;
      };
      for (int it = 0; it < 200; ++it) (side(0.5 * (lo + hi)) ? hi : lo) = 0.5 * (lo + hi);
      expect = j.u + 0.5 * (lo + hi) * (j.v - j.u);
    }
    try {
      const auto s = refine_jump(*shape, j.u, j.v, 1e-6, Thresholds::defaults_for(*shape));
      const double err = (s.location - expect).norm();
      out.require(err <= 1e-6, "%s refine_jump off by %.3g", std::string(to_string(j.kind)).c_str(), err);
      out.require(s.iterations <= 40, "%s refine_jump took %d bisections", std::string(to_string(j.kind)).c_str(),
                  s.iterations);
      worst_iter = std::max(worst_iter, s.iterations);
      worst_err = std::max(worst_err, err);
    } catch (const Error& e) {
      out.require(false, "%s refine_jump threw: %s", std::string(to_string(j.kind)).c_str(), e.what());
    }
  }
  out.note("refine_jump: %zu segments, max error %.2e, max %d bisections", jumps.size(), worst_err, worst_iter);
  return out;
}

Outcome inner_metric() {
  Outcome out;
  const auto circle = shape_of(ShapeKind::circle);
  const SpatialIndex index(sample_shape(*circle, 10000, 1));
  const double h = index.resolution();
  const GeodesicGraph graph(index, 4.0 * h);
  const auto anti = inner_distance(graph, make_vec({1.0, 0.0}), make_vec({-1.0, 0.0}));
  out.require(std::abs(anti.length - kPi) <= 0.01, "antipodal inner %.5f", anti.length);
  out.require(anti.length >= 2.0 - 2.0 * h, "antipodal inner below outer");
  const auto proj =
      project_segment(index, make_vec({2.0, 0.0}), make_vec({0.0, 2.0}), 200, Thresholds::defaults_for(index));
  out.require(std::abs(proj.length - kPi / 2.0) <= 0.01, "projection length %.5f", proj.length);
  const double chord = (proj.vertices.front() - proj.vertices.back()).norm();
  out.require(proj.length >= chord - 2.0 * h, "projection shorter than its chord");
  Rng rng(12);
  int pairs = 0;
  for (int i = 0; i < 200; ++i) {
    const Vec x = index.point(rng.index(index.size()));
    const Vec y = index.point(rng.index(index.size()));
    const double inner = inner_distance(graph, x, y).length;
    // Arc between the two angles.
    double dt = std::abs(std::atan2(x[1], x[0]) - std::atan2(y[1], y[0]));
    dt = std::min(dt, 2.0 * kPi - dt);
    out.require(inner >= (x - y).norm() - 2.0 * h, "pair %d: inner %.5f < outer %.5f", i, inner, (x - y).norm());
    out.require(std::abs(inner - dt) <= 0.01, "pair %d: inner %.5f vs arc %.5f", i, inner, dt);
    ++pairs;
  }
  out.note("antipodes %.5f, quarter projection %.5f, %d random pairs inner >= outer - 2h", anti.length, proj.length,
           pairs);
  return out;
}

struct CloudShape {
  std::unique_ptr<Shape> shape;
  SpatialIndex index;
  GeodesicGraph graph;
  CloudShape(ShapeKind kind, std::size_t n, std::map<std::string, double> params, double radius = 0.0)
      : shape(shape_of(kind, std::move(params))),
        index(sample_shape(*shape, n, 1)),
        graph(index, radius > 0.0 ? radius : 4.0 * index.resolution()) {}
};

Outcome theorem_suite() {
  Outcome out;
  {
    CloudShape cusp(ShapeKind::cusp, 100000, {{"t_max", 0.25}});
    TheoremConfig cfg;
    for (int k = 0; k <= 4; ++k) cfg.radii.push_back(0.2 * std::pow(2.0, -k));
    const auto v = verify_theorem(cusp.graph, Vec::Zero(2), cfg);
    out.require(v.consistent, "cusp tip inconsistent");
    out.require(v.lne.verdict == LneVerdict::diverging, "cusp tip verdict %s", std::string(to_string(v.lne.verdict)).c_str());
    out.require(v.medial_approach, "cusp tip: no medial approach");
    for (const auto& b : v.balls) out.require(b.flagged > 0, "cusp tip: no medial sample in ball r=%g", b.radius);
    for (std::size_t i = 0; i < v.lne.constants.size(); ++i) {
      const double t = cfg.radii[i] / 2.0;
      const double oracle = cusp_arc(t) / std::pow(t, 1.5);
      out.require(std::abs(v.lne.constants[i] - oracle) <= 0.05 * oracle, "cusp r=%g: constant %.3f vs %.3f",
                  cfg.radii[i], v.lne.constants[i], oracle);
    }
    out.note("cusp tip diverging (%.2f -> %.2f) with medial approach", v.lne.constants.front(), v.lne.constants.back());
  }
  {
    CloudShape circle(ShapeKind::circle, 10000, {});
    TheoremConfig cfg;
    cfg.radii = {0.5, 0.25, 0.125};
    const auto v = verify_theorem(circle.graph, make_vec({1.0, 0.0}), cfg);
    out.require(v.consistent && v.lne.verdict == LneVerdict::bounded, "circle (1,0): %s",
                std::string(to_string(v.lne.verdict)).c_str());
    out.require(!v.medial_approach && v.balls.front().flagged == 0, "circle (1,0): medial sample within 0.5");
    out.require(v.rectifiable, "circle (1,0): projection paths failed");
  }
  {
    CloudShape cone(ShapeKind::cone, 60000, {{"radius", 1.0}});
    TheoremConfig cfg;
    cfg.radii = {0.5, 0.25, 0.125};
    cfg.scan_resolution = 17;
    const auto v = verify_theorem(cone.graph, Vec::Zero(3), cfg);
    out.require(v.consistent, "cone apex inconsistent");
    out.require(v.lne.verdict == LneVerdict::bounded, "cone apex verdict %s",
                std::string(to_string(v.lne.verdict)).c_str());
    out.require(v.medial_approach, "cone apex: no medial approach");
    out.note("cone apex bounded (%.3f, %.3f, %.3f) with medial approach", v.lne.constants[0], v.lne.constants[1],
             v.lne.constants[2]);
  }
  struct RandomCase {
    ShapeKind kind;
    std::size_t n;
    std::map<std::string, double> params;
    std::vector<double> radii;
    int scan_resolution;
    double graph_radius;
  };
  const std::vector<RandomCase> random_cases = {
      {ShapeKind::circle, 10000, {}, {0.4, 0.2, 0.1}, 21, 0.0},
      {ShapeKind::two_points, 2, {}, {0.5, 0.25}, 21, 0.5},
      {ShapeKind::cusp, 40000, {}, {0.2, 0.1, 0.05}, 21, 0.0},
      {ShapeKind::half_helix, 40000, {}, {0.4, 0.2, 0.1}, 11, 0.0},
      {ShapeKind::full_helix, 40000, {}, {0.4, 0.2, 0.1}, 11, 0.0},
      {ShapeKind::cone, 40000, {{"radius", 1.0}}, {0.4, 0.2, 0.1}, 11, 0.0},
  };
  int inconsistent = 0, total = 0;
  std::map<std::string, int> tally;
  for (const auto& c : random_cases) {
    CloudShape s(c.kind, c.n, c.params, c.graph_radius);
    Rng rng(99);
    TheoremConfig cfg;
    cfg.radii = c.radii;
    cfg.source_count = 8;
    cfg.scan_resolution = c.scan_resolution;
    cfg.rectifiable_pairs = 2;
    for (int i = 0; i < 20; ++i) {
      cfg.seed = 1000 + i;
      const Vec p = s.index.point(rng.index(s.index.size()));
      const auto v = verify_theorem(s.graph, p, cfg);
      ++total;
      ++tally[std::string(to_string(v.lne.verdict))];
      if (!v.consistent) {
        ++inconsistent;
        out.require(false, "%s point (%.3f, %.3f) inconsistent", std::string(to_string(c.kind)).c_str(), p[0], p[1]);
      }
    }
  }
  out.require(total == 120, "%d random points", total);
  out.note("%d random points, %d inconsistent (bounded %d, diverging %d, inconclusive %d)", total, inconsistent,
           tally["bounded"], tally["diverging"], tally["inconclusive"]);
  return out;
}

Outcome conjecture_suite() {
  Outcome out;
  {
    CloudShape cusp(ShapeKind::cusp, 100000, {{"t_max", 0.05}});
    const std::vector<Vec> xi = {make_vec({0.04, 0.0}), make_vec({0.01, 0.0}), make_vec({0.0025, 0.0})};
    const auto tr = conjecture_trace(cusp.graph, Vec::Zero(2), xi, Thresholds::defaults_for(cusp.index));
    out.require(tr.ratios.size() == 3 && tr.skipped == 0, "cusp trace incomplete");
    for (std::size_t k = 0; k < tr.ratios.size(); ++k) {
      const double expect = 1.0 / std::sqrt(xi[k][0]);
      out.require(std::abs(tr.ratios[k] - expect) <= 0.1 * expect, "a=%g: ratio %.3f vs %.3f", xi[k][0], tr.ratios[k],
                  expect);
    }
    out.require(tr.diverges, "cusp ratios do not diverge");
    if (tr.ratios.size() == 3) out.note("cusp ratios %.2f, %.2f, %.2f", tr.ratios[0], tr.ratios[1], tr.ratios[2]);
  }
  {
    CloudShape cone(ShapeKind::cone, 60000, {{"radius", 1.0}});
    const auto tr = conjecture_probe(cone.graph, Vec::Zero(3), 0.6, 4, 15, Thresholds::defaults_for(cone.index));
    out.require(tr.ratios.size() >= 2, "cone trace has %zu ratios", tr.ratios.size());
    double lo = 10.0, hi = 0.0;
    for (double r : tr.ratios) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    out.require(lo >= 1.1 && hi <= 1.5, "cone ratios in [%.3f, %.3f]", lo, hi);
    out.note("cone ratios in [%.3f, %.3f]", lo, hi);
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Manifest minus wall-clock fields.
std::string manifest_core(const fs::path& p) {
  auto j = Json::parse(slurp(p));
  j.erase("created");
  for (auto& e : j["experiments"]) e.erase("elapsed_seconds");
  return j.dump();
}

Outcome determinism() {
  Outcome out;
  const fs::path configs = fs::path(MEDLAB_SOURCE_DIR) / "configs";
  const fs::path work = fs::temp_directory_path() / "medlab_acceptance_determinism";
  fs::remove_all(work);
  std::size_t compared = 0;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(configs)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& cfg : files) {
    const fs::path out_dir = work / cfg.stem() / "out";
    const fs::path first = work / cfg.stem() / "first";
    const std::string cmd = std::string(MEDLAB_CLI) + " run --config " + cfg.string() + " --out " + out_dir.string() +
                            " >/dev/null 2>&1";
    const int a = std::system(cmd.c_str());
    out.require(a == 0, "%s: first run exit status %d", cfg.filename().c_str(), a);
    fs::rename(out_dir, first);
    const int b = std::system(cmd.c_str());
    out.require(b == 0, "%s: second run exit status %d", cfg.filename().c_str(), b);
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(first)) names.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(out_dir)) names.insert(e.path().filename().string());
    for (const auto& name : names) {
      const bool same = name == "manifest.json" ? manifest_core(first / name) == manifest_core(out_dir / name)
                                                : slurp(first / name) == slurp(out_dir / name);
      out.require(same, "%s/%s differs between runs", cfg.stem().c_str(), name.c_str());
      ++compared;
    }
  }
  out.require(compared > 0, "no outputs compared");
  out.note("%zu configs, %zu output files byte-identical (manifest modulo timestamps)", files.size(), compared);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient of the distance", gradient_suite},
      {"helix closest-point blow-up", helix_blowup},
      {"Lipschitz bound on certified regions", lipschitz_suite},
      {"on-set two-Lipschitz", on_set_suite},
      {"medial detection oracles", medial_detection},
      {"inner-metric oracles", inner_metric},
      {"theorem verdicts", theorem_suite},
      {"conjecture probe", conjecture_suite},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s) [%.1f s]: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, secs,
                o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
