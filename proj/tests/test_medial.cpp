#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "medlab/medial.hpp"

using namespace medlab;

namespace {

ShapeSpec spec_of(ShapeKind kind, std::map<std::string, double> params = {}) {
  ShapeSpec s;
  s.kind = kind;
  s.params = std::move(params);
  return s;
}

SpatialIndex index_of(ShapeKind kind, std::size_t n, std::map<std::string, double> params = {}) {
  const auto shape = make_shape(spec_of(kind, std::move(params)));
  return SpatialIndex(sample_shape(*shape, n, 1));
}

Box box2(double x0, double x1, double y0, double y1) { return {make_vec({x0, y0}), make_vec({x1, y1})}; }

}  // namespace

TEST_CASE("is_medial on the catalog") {
  SUBCASE("two points") {
    const auto idx = index_of(ShapeKind::two_points, 2);
    const auto f = is_medial(idx, make_vec({0.0, 0.5}), Thresholds::defaults_for(idx));
    CHECK(f.flag);
    CHECK(f.spread == doctest::Approx(2.0));
    CHECK(f.witness_a == make_vec({-1.0, 0.0}));
    CHECK(f.witness_b == make_vec({1.0, 0.0}));
  }
  SUBCASE("circle off-centre") {
    const auto idx = index_of(ShapeKind::circle, 10000);
    CHECK_FALSE(is_medial(idx, make_vec({0.5, 0.0}), Thresholds::defaults_for(idx)).flag);
    const auto shape = make_shape(spec_of(ShapeKind::circle));
    CHECK_FALSE(is_medial(*shape, make_vec({0.5, 0.0}), Thresholds::defaults_for(*shape)).flag);
  }
  SUBCASE("cone axis") {
    const auto shape = make_shape(spec_of(ShapeKind::cone));
    const auto exact = is_medial(*shape, make_vec({0.0, 0.0, 1.0}), Thresholds::defaults_for(*shape));
    CHECK(exact.flag);
    CHECK(exact.spread == doctest::Approx(1.0));
    const auto idx = index_of(ShapeKind::cone, 40000);
    CHECK(is_medial(idx, make_vec({0.0, 0.0, 1.0}), Thresholds::defaults_for(idx)).flag);
  }
  SUBCASE("points on the set are not medial") {
    const auto idx = index_of(ShapeKind::circle, 1000);
    CHECK_FALSE(is_medial(idx, idx.point(0), Thresholds::defaults_for(idx)).flag);
  }
  SUBCASE("thresholds must be positive") {
    const auto idx = index_of(ShapeKind::circle, 1000);
    CHECK_THROWS_AS(is_medial(idx, make_vec({0.0, 0.0}), Thresholds{}), Error);
  }
}

TEST_CASE("grid nodes are symmetric about the box centre") {
  const auto g = GridSpec::uniform(box2(-1.0, 1.0, -0.5, 0.5), 5);
  CHECK(g.node_count() == 25);
  CHECK(g.node(0) == make_vec({-1.0, -0.5}));
  CHECK(g.node(12) == make_vec({0.0, 0.0}));
  CHECK(g.node(24) == make_vec({1.0, 0.5}));
  CHECK(g.step(0) == doctest::Approx(0.5));
  const auto ball = GridSpec::ball(make_vec({1.0, 1.0}), 1.0, 3);
  CHECK(ball.in_mask(make_vec({1.0, 2.0})));
  CHECK_FALSE(ball.in_mask(make_vec({2.0, 2.0})));
  GridSpec bad = GridSpec::uniform(box2(0, 1, 0, 1), 1);
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("circle scan flags only near the centre") {
  const auto idx = index_of(ShapeKind::circle, 10000);
  const auto grid = GridSpec::uniform(box2(-0.5, 0.5, -0.5, 0.5), 101);
  const auto report = scan_medial(idx, grid, Thresholds::defaults_for(idx), {{"origin", Vec::Zero(2)}});
  REQUIRE(report.flagged() > 0);
  for (const auto& s : report.samples) CHECK(s.location.norm() <= 2.0 * grid.max_step() + 1e-12);
  CHECK(report.min_distance_to.at("origin") == doctest::Approx(0.0));
}

TEST_CASE("two-point scan flags only the bisector") {
  const auto idx = index_of(ShapeKind::two_points, 2);
  const auto grid = GridSpec::uniform(box2(-1.0, 1.0, -1.0, 1.0), 101);
  const auto report = scan_medial(idx, grid, Thresholds::defaults_for(idx));
  CHECK(report.flagged() == 101);
  for (const auto& s : report.samples) CHECK(std::abs(s.location[0]) <= grid.step(0));
  // Reflection y -> -y maps the flagged set to itself.
  std::set<std::pair<long, long>> cells;
  for (const auto& s : report.samples) cells.emplace(std::lround(s.location[0] / grid.step(0)), std::lround(s.location[1] / grid.step(1)));
  for (const auto& [i, j] : cells) CHECK(cells.count({i, -j}) == 1);
}

TEST_CASE("cusp scan finds the axis approaching the origin") {
  const auto idx = index_of(ShapeKind::cusp, 40000);
  GridSpec grid;
  grid.box = box2(0.0, 0.5, -0.1, 0.1);
  grid.resolution = {201, 81};
  const auto report = scan_medial(idx, grid, Thresholds::defaults_for(idx), {{"origin", Vec::Zero(2)}});
  REQUIRE(report.flagged() > 0);
  for (const auto& s : report.samples) {
    CHECK(std::abs(s.location[1]) <= grid.step(1) + 1e-12);
    CHECK(s.location[0] > 0.0);
  }
  CHECK(report.min_distance_to.at("origin") <= 0.02);
  std::set<std::pair<long, long>> cells;
  for (const auto& s : report.samples) cells.emplace(std::lround(s.location[0] / grid.step(0)), std::lround(s.location[1] / grid.step(1)));
  for (const auto& [i, j] : cells) CHECK(cells.count({i, -j}) == 1);
}

TEST_CASE("serial and parallel scans agree") {
  const auto idx = index_of(ShapeKind::cusp, 4000);
  GridSpec grid;
  grid.box = box2(0.0, 0.5, -0.1, 0.1);
  grid.resolution = {51, 21};
  const auto thr = Thresholds::defaults_for(idx);
  const auto a = scan_medial(idx, grid, thr);
  const auto b = scan_medial_serial(idx, grid, thr);
  CHECK(a.node_flag == b.node_flag);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].location == b.samples[i].location);
}

TEST_CASE("scaling the circle scales the detected medial samples") {
  const auto one = index_of(ShapeKind::circle, 2000);
  const auto two = index_of(ShapeKind::circle, 2000, {{"scale", 2.0}});
  const auto r1 = scan_medial(one, GridSpec::uniform(box2(-0.5, 0.5, -0.5, 0.5), 41), Thresholds::defaults_for(one));
  const auto r2 = scan_medial(two, GridSpec::uniform(box2(-1.0, 1.0, -1.0, 1.0), 41), Thresholds::defaults_for(two));
  REQUIRE(r1.flagged() > 0);
  REQUIRE(r1.flagged() == r2.flagged());
  for (std::size_t i = 0; i < r1.samples.size(); ++i) {
    CHECK((r2.samples[i].location - 2.0 * r1.samples[i].location).norm() <= 1e-12);
  }
}

TEST_CASE("refine_jump converges to analytic medial points") {
  struct Case {
    ShapeKind kind;
    Vec u, v, expect;
  };
  const std::vector<Case> cases = {
      {ShapeKind::two_points, make_vec({-0.7, 0.3}), make_vec({0.8, 0.3}), make_vec({0.0, 0.3})},
      {ShapeKind::circle, make_vec({-0.5, -0.2}), make_vec({0.5, 0.2}), make_vec({0.0, 0.0})},
      {ShapeKind::cusp, make_vec({0.3, 0.25}), make_vec({0.3, -0.25}), make_vec({0.3, 0.0})},
  };
  const double tol = 1e-6;
  for (const auto& c : cases) {
    const auto shape = make_shape(spec_of(c.kind));
    const auto s = refine_jump(*shape, c.u, c.v, tol, Thresholds::defaults_for(*shape));
    CHECK(s.method == MedialMethod::jump_bisection);
    CHECK((s.location - c.expect).norm() <= tol);
    CHECK(s.bracket <= tol);
    CHECK(s.iterations <= static_cast<int>(std::ceil(std::log2((c.u - c.v).norm() / tol))));
    CHECK(s.iterations <= 40);
  }
}

TEST_CASE("refine_jump on clouds lands within the sampling resolution") {
  const auto idx = index_of(ShapeKind::circle, 10000);
  const auto thr = Thresholds::defaults_for(idx);
  const auto s = refine_jump(idx, make_vec({-0.5, -0.2}), make_vec({0.5, 0.2}), 1e-6, thr);
  // Near the centre every node within ~lambda is flagged and pins the bracket.
  CHECK(s.location.norm() <= thr.lambda);
  const auto grid = GridSpec::uniform(box2(-0.5, 0.5, -0.5, 0.5), 101);
  const auto report = scan_medial(idx, grid, thr);
  CHECK(report.distance_to_samples(s.location) <= 2.0 * grid.max_step());
}

TEST_CASE("refine_jump errors") {
  SUBCASE("continuous map") {
    const auto shape = make_shape(spec_of(ShapeKind::circle));
    try {
      refine_jump(*shape, make_vec({2.0, 0.0}), make_vec({0.0, 2.0}), 1e-6, Thresholds::defaults_for(*shape));
      FAIL("expected no_jump");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_jump);
    }
  }
  SUBCASE("two crossings") {
    SampleCloud cloud;
    cloud.points = {make_vec({-1.0, 0.0}), make_vec({0.0, 0.0}), make_vec({1.0, 0.0})};
    const SpatialIndex idx(cloud);
    Thresholds thr;
    thr.epsilon = 1e-9;
    thr.lambda = 0.1;
    try {
      refine_jump(idx, make_vec({-0.9, 1.0}), make_vec({0.9, 1.0}), 1e-6, thr);
      FAIL("expected multiple_jumps");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::multiple_jumps);
    }
    const auto one = refine_jump(idx, make_vec({-0.9, 1.0}), make_vec({0.2, 1.0}), 1e-6, thr);
    CHECK(one.location[0] == doctest::Approx(-0.5).epsilon(1e-5));
  }
  SUBCASE("medial endpoint") {
    const auto shape = make_shape(spec_of(ShapeKind::two_points));
    CHECK_THROWS_AS(refine_jump(*shape, make_vec({0.0, 1.0}), make_vec({1.0, 1.0}), 1e-6,
                                Thresholds::defaults_for(*shape)),
                    Error);
  }
}

TEST_CASE("scan CSV lists unmasked nodes") {
  const auto idx = index_of(ShapeKind::two_points, 2);
  const auto report = scan_medial(idx, GridSpec::ball(Vec::Zero(2), 0.5, 11), Thresholds::defaults_for(idx));
  std::ostringstream os;
  write_scan_csv(os, report);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x0,x1,spread,flag");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < report.grid.node_count(); ++i) inside += report.grid.in_mask(report.grid.node(i));
  CHECK(rows == inside);
  CHECK(rows < report.grid.node_count());
}
