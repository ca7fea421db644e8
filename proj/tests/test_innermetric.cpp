#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "medlab/innermetric.hpp"

using namespace medlab;

namespace {

constexpr double kPi = std::numbers::pi;

struct Fixture {
  std::unique_ptr<Shape> shape;
  SpatialIndex index;
  Fixture(ShapeKind kind, std::size_t n, std::uint64_t seed = 1)
      : shape(make_shape(ShapeSpec{kind, {}, 0, {}, {}})), index(sample_shape(*shape, n, seed)) {}
};

// Arc length of the cusp branch from 0 to t by composite Simpson.
double cusp_arc(double t, int n = 20000) {
  auto f = [](double s) { return std::sqrt(1.0 + 2.25 * s); };
  const double h = t / n;
  double acc = f(0.0) + f(t);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("graph construction") {
  SUBCASE("circle is one component") {
    Fixture f(ShapeKind::circle, 1000);
    const GeodesicGraph g(f.index, 5.0 * f.index.resolution());
    CHECK(g.component_count() == 1);
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      const auto nb = g.neighbours(v);
      const auto wt = g.weights(v);
      for (std::size_t k = 0; k < nb.size(); ++k) {
        CHECK(wt[k] > 0.0);
        CHECK(wt[k] <= g.connect_radius());
      }
    }
  }
  SUBCASE("two points are two components") {
    Fixture f(ShapeKind::two_points, 2);
    const GeodesicGraph g(f.index, 0.5);
    CHECK(g.component_count() == 2);
    try {
      inner_distance(g, make_vec({-1.0, 0.0}), make_vec({1.0, 0.0}));
      FAIL("expected no_path");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_path);
    }
  }
  SUBCASE("cusp branches join at the sampled origin") {
    Fixture f(ShapeKind::cusp, 2000);
    CHECK(f.index.distance(Vec::Zero(2)) == 0.0);
    const GeodesicGraph g(f.index, 5.0 * f.index.resolution());
    CHECK(g.component_count() == 1);
  }
  SUBCASE("radius floor") {
    Fixture f(ShapeKind::circle, 1000);
    try {
      GeodesicGraph g(f.index, 3.0 * f.index.resolution());
      FAIL("expected radius_below_floor");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::radius_below_floor);
    }
  }
}

TEST_CASE("inner distance against arc-length oracles") {
  SUBCASE("circle antipodes") {
    Fixture f(ShapeKind::circle, 10000);
    const GeodesicGraph g(f.index, 4.0 * f.index.resolution());
    const auto p = inner_distance(g, make_vec({1.0, 0.0}), make_vec({-1.0, 0.0}));
    CHECK(std::abs(p.length - kPi) <= 0.01);
    CHECK(p.kind == PathKind::graph_geodesic);
    CHECK(p.length == doctest::Approx(polyline_length(p.vertices)));
    CHECK((p.vertices.front() - make_vec({1.0, 0.0})).norm() <= f.index.resolution());
    CHECK(inner_distance(g, make_vec({1.0, 0.0}), make_vec({1.0, 0.0})).length == 0.0);
  }
  SUBCASE("cusp across the tip") {
    const double t = 0.04;
    const double oracle = 2.0 * cusp_arc(t);
    // Closed form 2 * (8/27) * ((1 + 9t/4)^{3/2} - 1).
    CHECK(oracle == doctest::Approx(16.0 / 27.0 * (std::pow(1.0 + 2.25 * t, 1.5) - 1.0)).epsilon(1e-10));
    const Vec x = make_vec({t, std::pow(t, 1.5)});
    const Vec y = make_vec({t, -std::pow(t, 1.5)});
    CHECK((x - y).norm() == doctest::Approx(0.016));
    // Branches closer than the connect radius R are joined, which cuts the
    // tip short by at most twice the parameter where 2 t^{3/2} = R.
    for (auto [t_max, n] : {std::pair{1.0, std::size_t{40000}}, std::pair{0.05, std::size_t{100000}}}) {
      const auto shape = make_shape(ShapeSpec{ShapeKind::cusp, {{"t_max", t_max}}, 0, {}, {}});
      const SpatialIndex index(sample_shape(*shape, n, 1));
      const GeodesicGraph g(index, 4.0 * index.resolution());
      const double cut = 2.0 * std::pow(0.5 * g.connect_radius(), 2.0 / 3.0);
      const auto p = inner_distance(g, x, y);
      CHECK(p.length <= oracle + 2.0 * index.resolution());
      CHECK(p.length >= oracle - cut);
    }
  }
  SUBCASE("off-cloud endpoints are rejected") {
    Fixture f(ShapeKind::circle, 1000);
    const GeodesicGraph g(f.index, 4.0 * f.index.resolution());
    try {
      inner_distance(g, make_vec({0.5, 0.0}), make_vec({1.0, 0.0}));
      FAIL("expected not_on_shape");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::not_on_shape);
    }
  }
}

TEST_CASE("metric properties on random pairs") {
  for (auto kind : {ShapeKind::circle, ShapeKind::cusp}) {
    Fixture f(kind, 4000);
    const double h = f.index.resolution();
    const GeodesicGraph g(f.index, 4.0 * h);
    Rng rng(21);
    for (int i = 0; i < 40; ++i) {
      const Vec x = f.shape->random_point(rng);
      const Vec y = f.shape->random_point(rng);
      const Vec z = f.shape->random_point(rng);
      const double xy = inner_distance(g, x, y).length;
      const double yz = inner_distance(g, y, z).length;
      const double xz = inner_distance(g, x, z).length;
      CHECK(xy >= (x - y).norm() - 2.0 * h);
      CHECK(xz <= xy + yz + 4.0 * h);
    }
  }
}

TEST_CASE("refining the sample does not lengthen geodesics") {
  for (auto kind : {ShapeKind::circle, ShapeKind::half_helix}) {
    Fixture coarse(kind, 4000);
    Fixture fine(kind, 8000);
    const GeodesicGraph gc(coarse.index, 4.0 * coarse.index.resolution());
    const GeodesicGraph gf(fine.index, 4.0 * fine.index.resolution());
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
      const Vec x = fine.index.point(rng.index(fine.index.size()));
      const Vec y = fine.index.point(rng.index(fine.index.size()));
      const double lc = inner_distance(gc, x, y).length;
      const double lf = inner_distance(gf, x, y).length;
      CHECK(lf <= lc + 2.0 * coarse.index.resolution());
    }
  }
}

TEST_CASE("parallel and serial pair batches agree") {
  Fixture f(ShapeKind::circle, 2000);
  const GeodesicGraph g(f.index, 4.0 * f.index.resolution());
  Rng rng(9);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int i = 0; i < 20; ++i) pairs.emplace_back(f.shape->random_point(rng), f.shape->random_point(rng));
  const auto a = inner_distances(g, pairs);
  const auto b = inner_distances_serial(g, pairs);
  for (std::size_t i = 0; i < pairs.size(); ++i) CHECK(a[i].length == b[i].length);
}

TEST_CASE("projection paths") {
  SUBCASE("circle quarter arc") {
    Fixture f(ShapeKind::circle, 10000);
    const auto thr = Thresholds::defaults_for(f.index);
    const auto p = project_segment(f.index, make_vec({2.0, 0.0}), make_vec({0.0, 2.0}), 200, thr);
    CHECK(std::abs(p.length - kPi / 2.0) <= 0.01);
    CHECK(p.kind == PathKind::projection_path);
    const auto exact = make_shape(ShapeSpec{ShapeKind::circle, {}, 0, {}, {}});
    const auto q = project_segment_adaptive(*exact, make_vec({2.0, 0.0}), make_vec({0.0, 2.0}),
                                            Thresholds::defaults_for(*exact));
    CHECK(q.length == doctest::Approx(kPi / 2.0).epsilon(1e-4));
    CHECK(q.steps >= 400);

    // The graph geodesic between the images is bounded by the projection path.
    const GeodesicGraph g(f.index, 4.0 * f.index.resolution());
    const auto inner = inner_distance(g, make_vec({1.0, 0.0}), make_vec({0.0, 1.0}));
    CHECK(inner.length <= p.length + 4.0 * f.index.resolution());
    CHECK(std::abs(inner.length - p.length) <= 0.01);
  }
  SUBCASE("degenerate segment") {
    Fixture f(ShapeKind::cusp, 2000);
    const auto p = project_segment(f.index, make_vec({0.5, 0.2}), make_vec({0.5, 0.2}), 200,
                                   Thresholds::defaults_for(f.index));
    CHECK(p.length == 0.0);
  }
  SUBCASE("crossing the bisector") {
    Fixture f(ShapeKind::two_points, 2);
    try {
      project_segment(f.index, make_vec({-1.0, 1.0}), make_vec({1.0, 1.0}), 200, Thresholds::defaults_for(f.index));
      FAIL("expected medial_crossing");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::medial_crossing);
      CHECK(std::string(e.what()).find("(0.000000, 1.000000)") != std::string::npos);
    }
  }
}

TEST_CASE("path CSV") {
  PathEstimate p;
  p.vertices = {make_vec({0.0, 0.0}), make_vec({1.0, 0.5})};
  std::ostringstream os;
  write_path_csv(os, p);
  CHECK(os.str() == "x0,x1\n0,0\n1,0.5\n");
}
