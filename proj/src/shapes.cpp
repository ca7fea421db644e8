#include "medlab/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "medlab/nearfield.hpp"

namespace medlab {

namespace {

constexpr double kPi = std::numbers::pi;

const std::map<ShapeKind, std::set<std::string>>& allowed_params() {
  static const std::map<ShapeKind, std::set<std::string>> table = {
      {ShapeKind::circle, {"radius"}},
      {ShapeKind::two_points, {"ax", "ay", "bx", "by"}},
      {ShapeKind::cusp, {"t_max"}},
      {ShapeKind::half_helix, {"u_max"}},
      {ShapeKind::full_helix, {"u_max"}},
      {ShapeKind::cone, {"radius"}},
      {ShapeKind::segment_list, {}},
      {ShapeKind::point_cloud, {"fill_distance"}},
  };
  return table;
}

int natural_dim(const ShapeSpec& spec) {
  switch (spec.kind) {
    case ShapeKind::circle:
    case ShapeKind::two_points:
    case ShapeKind::cusp: return 2;
    case ShapeKind::half_helix:
    case ShapeKind::full_helix:
    case ShapeKind::cone: return 3;
    case ShapeKind::segment_list:
      return spec.segments.empty() ? 0 : static_cast<int>(spec.segments.front()[0].size());
    case ShapeKind::point_cloud:
      return spec.points.empty() ? 0 : static_cast<int>(spec.points.front().size());
  }
  return 0;
}

void require_positive(const ShapeSpec& spec, const std::string& name, double fallback) {
  const double v = spec.param(name, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(Errc::invalid_params, to_string(spec.kind).data() + std::string(": parameter '") + name +
                                          "' must be positive and finite");
  }
}

// ---------------------------------------------------------------------------
// Parametric curves
// ---------------------------------------------------------------------------

struct CurvePiece {
  std::function<Vec(double)> r;
  std::function<Vec(double)> dr;
  std::function<Vec(double)> ddr;
  double u0 = 0.0;
  double u1 = 1.0;
};

/// Union of parametric curve pieces. Closest points come from a dense
/// parameter grid followed by Brent refinement and Newton polishing of every
/// grid-local minimum, endpoints included.
class CurveShape : public Shape {
 public:
  CurveShape(ShapeSpec spec, std::vector<CurvePiece> pieces, std::size_t grid)
      : Shape(std::move(spec)), pieces_(std::move(pieces)) {
    dim_ = static_cast<std::size_t>(pieces_.front().r(pieces_.front().u0).size());
    for (const auto& piece : pieces_) {
      Eigen::MatrixXd pts(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(grid));
      std::vector<double> us(grid);
      for (std::size_t i = 0; i < grid; ++i) {
        us[i] = param_at(piece, i, grid);
        pts.col(static_cast<Eigen::Index>(i)) = piece.r(us[i]);
      }
      grid_u_.push_back(std::move(us));
      grid_pts_.push_back(std::move(pts));
      build_arc_table(piece);
    }
    std::vector<Vec> cols;
    for (const auto& pts : grid_pts_) {
      for (Eigen::Index j = 0; j < pts.cols(); ++j) cols.emplace_back(pts.col(j));
    }
    bounds_ = bounding_box(cols);
  }

  std::size_t dim() const override { return dim_; }
  Box bounds() const override { return bounds_; }
  double distance(const Vec& a) const override { return near_set(a, 0.0).distance; }

  NearSet near_set(const Vec& a, double epsilon) const override {
    check_dim(a);
    auto cands = local_minima(a);
    NearSet ns;
    ns.epsilon = epsilon;
    ns.distance = cands.front().second;
    const double cutoff = ns.distance + epsilon + tie_tolerance();
    for (auto& [p, d] : cands) {
      if (d <= cutoff) ns.members.push_back(std::move(p));
    }
    finalize_near_set(ns, a, false);
    return ns;
  }

 protected:
  static double param_at(const CurvePiece& piece, std::size_t i, std::size_t n) {
    if (i + 1 == n) return piece.u1;
    return piece.u0 + (piece.u1 - piece.u0) * (static_cast<double>(i) / static_cast<double>(n - 1));
  }

  void check_dim(const Vec& a) const {
    if (static_cast<std::size_t>(a.size()) != dim_) {
      throw Error(Errc::invalid_params, "query dimension does not match the shape");
    }
  }

  std::vector<std::pair<Vec, double>> local_minima(const Vec& a) const {
    std::vector<std::pair<Vec, double>> out;
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
      const auto& piece = pieces_[k];
      const auto& us = grid_u_[k];
      const Eigen::VectorXd f = (grid_pts_[k].colwise() - a).colwise().squaredNorm().transpose();
      const std::size_t n = us.size();
      auto sq = [&](double u) { return (piece.r(u) - a).squaredNorm(); };
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const bool left_ok = i == 0 || f[ii] <= f[ii - 1];
        const bool right_ok = i + 1 == n || f[ii] <= f[ii + 1];
        if (!left_ok || !right_ok) continue;
        const double lo = us[i == 0 ? 0 : i - 1];
        const double hi = us[i + 1 == n ? n - 1 : i + 1];
        std::uintmax_t iters = 200;
        auto [u, fu] = boost::math::tools::brent_find_minima(sq, lo, hi, std::numeric_limits<double>::digits, iters);
        // Newton on g(u) = <r(u) - a, r'(u)> = 0. Near a flat minimum the
        // squared distance cannot resolve u, so steps are accepted on |g|.
        auto stationarity = [&](double v) { return (piece.r(v) - a).dot(piece.dr(v)); };
        double g = stationarity(u);
        for (int it = 0; it < 6 && g != 0.0; ++it) {
          const Vec diff = piece.r(u) - a;
          const Vec d1 = piece.dr(u);
          const double gp = d1.squaredNorm() + diff.dot(piece.ddr(u));
          if (!(gp > 0.0) || !std::isfinite(gp)) break;
          const double next = u - g / gp;
          if (next < lo || next > hi) break;
          const double gn = stationarity(next);
          if (!(std::abs(gn) < std::abs(g))) break;
          u = next;
          g = gn;
        }
        fu = sq(u);
        if (lo == piece.u0 && sq(piece.u0) <= fu) {
          u = piece.u0;
          fu = sq(u);
        }
        if (hi == piece.u1 && sq(piece.u1) <= fu) {
          u = piece.u1;
          fu = sq(u);
        }
        out.emplace_back(piece.r(u), std::sqrt(fu));
      }
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
    // The same minimizer can be reached from adjacent grid cells or from two
    // pieces sharing an endpoint.
    std::vector<std::pair<Vec, double>> unique;
    const double merge = 1e-9 * scale();
    for (auto& c : out) {
      const bool dup = std::any_of(unique.begin(), unique.end(),
                                   [&](const auto& u) { return (u.first - c.first).norm() <= merge; });
      if (!dup) unique.push_back(std::move(c));
    }
    return unique;
  }

  // Arc length ------------------------------------------------------------

  void build_arc_table(const CurvePiece& piece) {
    constexpr std::size_t kTable = 8192;
    std::vector<double> us(kTable + 1), ss(kTable + 1, 0.0);
    for (std::size_t i = 0; i <= kTable; ++i) us[i] = param_at(piece, i, kTable + 1);
    for (std::size_t i = 0; i < kTable; ++i) {
      const double a = us[i], b = us[i + 1], m = 0.5 * (a + b);
      const double seg = (b - a) / 6.0 * (piece.dr(a).norm() + 4.0 * piece.dr(m).norm() + piece.dr(b).norm());
      ss[i + 1] = ss[i] + seg;
    }
    arc_u_.push_back(std::move(us));
    arc_s_.push_back(std::move(ss));
  }

  double piece_length(std::size_t k) const { return arc_s_[k].back(); }

  double param_at_length(std::size_t k, double s) const {
    const auto& ss = arc_s_[k];
    const auto& us = arc_u_[k];
    if (s <= 0.0) return us.front();
    if (s >= ss.back()) return us.back();
    const auto it = std::upper_bound(ss.begin(), ss.end(), s);
    const auto j = static_cast<std::size_t>(it - ss.begin());
    const double w = (s - ss[j - 1]) / (ss[j] - ss[j - 1]);
    return us[j - 1] + w * (us[j] - us[j - 1]);
  }

  /// n parameters equispaced in arc length, both endpoints included.
  std::vector<double> equispaced_params(std::size_t k, std::size_t n) const {
    std::vector<double> out(n);
    const double len = piece_length(k);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0) {
        out[i] = pieces_[k].u0;
      } else if (i + 1 == n) {
        out[i] = pieces_[k].u1;
      } else {
        out[i] = param_at_length(k, len * static_cast<double>(i) / static_cast<double>(n - 1));
      }
    }
    return out;
  }

  /// Upper estimate of the fill distance of consecutive samples along a
  /// piece: probes between each pair, distance to the nearer of the two.
  double chain_fill(std::size_t k, const std::vector<double>& us) const {
    const auto& piece = pieces_[k];
    double fill = 0.0;
    for (std::size_t i = 0; i + 1 < us.size(); ++i) {
      const Vec a = piece.r(us[i]);
      const Vec b = piece.r(us[i + 1]);
      for (int j = 1; j < 16; ++j) {
        const double u = us[i] + (us[i + 1] - us[i]) * j / 16.0;
        const Vec p = piece.r(u);
        fill = std::max(fill, std::min((p - a).norm(), (p - b).norm()));
      }
    }
    return fill;
  }

  Vec point_on(std::size_t k, double u) const { return pieces_[k].r(u); }
  const CurvePiece& piece(std::size_t k) const { return pieces_[k]; }
  std::size_t piece_count() const { return pieces_.size(); }

 private:
  std::vector<CurvePiece> pieces_;
  std::vector<std::vector<double>> grid_u_;
  std::vector<Eigen::MatrixXd> grid_pts_;
  std::vector<std::vector<double>> arc_u_;
  std::vector<std::vector<double>> arc_s_;
  std::size_t dim_ = 0;
  Box bounds_;
};

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

class CircleShape final : public Shape {
 public:
  explicit CircleShape(ShapeSpec spec) : Shape(std::move(spec)) {
    radius_ = this->spec().param("radius", 1.0) * this->spec().param("scale", 1.0);
  }

  std::size_t dim() const override { return 2; }
  Box bounds() const override { return {make_vec({-radius_, -radius_}), make_vec({radius_, radius_})}; }

  double distance(const Vec& a) const override { return std::abs(a.norm() - radius_); }

  NearSet near_set(const Vec& a, double epsilon) const override {
    NearSet ns;
    ns.epsilon = epsilon;
    const double n = a.norm();
    ns.distance = std::abs(n - radius_);
    if (n <= 1e-14 * radius_) {
      // Every point of the circle is a minimizer; a finite ring stands in.
      constexpr int kRing = 64;
      for (int k = 0; k < kRing; ++k) {
        const double th = 2.0 * kPi * k / kRing;
        ns.members.push_back(make_vec({radius_ * std::cos(th), radius_ * std::sin(th)}));
      }
      ns.continuum = true;
      finalize_near_set(ns, a, true);
      return ns;
    }
    ns.members.push_back(a * (radius_ / n));
    finalize_near_set(ns, a, false);
    return ns;
  }

  bool contains(const Vec& x, double tol) const override {
    return x.size() == 2 && std::abs(x.norm() - radius_) <= tol * std::max(1.0, radius_);
  }

  SampleCloud sample(std::size_t count, std::uint64_t seed) const override {
    Rng rng(seed);
    const double phase = rng.uniform() * 2.0 * kPi / static_cast<double>(count);
    SampleCloud cloud;
    cloud.seed = seed;
    cloud.shape_ref = spec().id();
    for (std::size_t i = 0; i < count; ++i) {
      const double th = phase + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(count);
      cloud.points.push_back(make_vec({radius_ * std::cos(th), radius_ * std::sin(th)}));
    }
    cloud.fill_distance = 2.0 * radius_ * std::sin(kPi / (2.0 * static_cast<double>(count)));
    return cloud;
  }

  Vec random_point(Rng& rng) const override {
    const double th = rng.uniform(0.0, 2.0 * kPi);
    return make_vec({radius_ * std::cos(th), radius_ * std::sin(th)});
  }

  std::optional<double> medial_distance(const Vec& a) const override { return a.norm(); }

 private:
  double radius_ = 1.0;
};

class TwoPointsShape final : public Shape {
 public:
  explicit TwoPointsShape(ShapeSpec spec) : Shape(std::move(spec)) {
    const double s = this->spec().param("scale", 1.0);
    a_ = s * make_vec({this->spec().param("ax", -1.0), this->spec().param("ay", 0.0)});
    b_ = s * make_vec({this->spec().param("bx", 1.0), this->spec().param("by", 0.0)});
    if ((a_ - b_).norm() == 0.0) throw Error(Errc::invalid_params, "two_points: the points coincide");
  }

  std::size_t dim() const override { return 2; }
  Box bounds() const override { return {a_.cwiseMin(b_), a_.cwiseMax(b_)}; }
  double distance(const Vec& q) const override { return std::min((q - a_).norm(), (q - b_).norm()); }

  NearSet near_set(const Vec& q, double epsilon) const override {
    NearSet ns;
    ns.epsilon = epsilon;
    const double da = (q - a_).norm();
    const double db = (q - b_).norm();
    ns.distance = std::min(da, db);
    const double cutoff = ns.distance + epsilon + tie_tolerance();
    if (da <= cutoff) ns.members.push_back(a_);
    if (db <= cutoff) ns.members.push_back(b_);
    finalize_near_set(ns, q, false);
    return ns;
  }

  bool contains(const Vec& x, double tol) const override {
    return x.size() == 2 && std::min((x - a_).norm(), (x - b_).norm()) <= tol;
  }

  SampleCloud sample(std::size_t /*count*/, std::uint64_t seed) const override {
    SampleCloud cloud;
    cloud.seed = seed;
    cloud.shape_ref = spec().id();
    cloud.points = {a_, b_};
    std::sort(cloud.points.begin(), cloud.points.end(), lex_less);
    cloud.fill_distance = 0.0;
    return cloud;
  }

  Vec random_point(Rng& rng) const override { return rng.uniform() < 0.5 ? a_ : b_; }

  std::optional<double> medial_distance(const Vec& q) const override {
    const Vec n = (b_ - a_).normalized();
    return std::abs((q - 0.5 * (a_ + b_)).dot(n));
  }

 private:
  Vec a_, b_;
};

class CuspShape final : public CurveShape {
 public:
  explicit CuspShape(ShapeSpec spec) : CurveShape(spec, pieces(spec), 4096) {
    scale_ = spec.param("scale", 1.0);
    t_max_ = spec.param("t_max", 1.0);
  }

  bool contains(const Vec& x, double tol) const override {
    if (x.size() != 2) return false;
    const double t = x[0] / scale_;
    if (t < -tol || t > t_max_ + tol) return false;
    return std::abs(std::abs(x[1]) - scale_ * std::pow(std::max(t, 0.0), 1.5)) <= tol;
  }

  // Mirror-symmetric: the lower branch repeats the upper samples with the
  // origin shared, so an even count is rounded up by one.
  SampleCloud sample(std::size_t count, std::uint64_t seed) const override {
    const std::size_t upper = count / 2 + 1;
    const auto us = equispaced_params(0, upper);
    SampleCloud cloud;
    cloud.seed = seed;
    cloud.shape_ref = spec().id();
    for (double u : us) cloud.points.push_back(point_on(0, u));
    for (std::size_t i = 1; i < us.size(); ++i) cloud.points.push_back(point_on(1, us[i]));
    cloud.fill_distance = chain_fill(0, us);
    return cloud;
  }

  Vec random_point(Rng& rng) const override {
    const double t = rng.uniform(0.0, t_max_);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return scale_ * make_vec({t, sign * std::pow(t, 1.5)});
  }

  std::optional<double> medial_distance(const Vec& a) const override {
    return a[0] > 0.0 ? std::abs(a[1]) : a.norm();
  }

 private:
  static std::vector<CurvePiece> pieces(const ShapeSpec& spec) {
    const double s = spec.param("scale", 1.0);
    const double tm = spec.param("t_max", 1.0);
    std::vector<CurvePiece> out;
    for (double sign : {1.0, -1.0}) {
      CurvePiece p;
      p.r = [s, sign](double t) { return Vec(s * make_vec({t, sign * std::pow(std::max(t, 0.0), 1.5)})); };
      p.dr = [s, sign](double t) { return Vec(s * make_vec({1.0, sign * 1.5 * std::sqrt(std::max(t, 0.0))})); };
      p.ddr = [s, sign](double t) {
        return Vec(s * make_vec({0.0, t > 0.0 ? sign * 0.75 / std::sqrt(t) : 0.0}));
      };
      p.u0 = 0.0;
      p.u1 = tm;
      out.push_back(std::move(p));
    }
    return out;
  }

  double scale_ = 1.0;
  double t_max_ = 1.0;
};

class HelixShape final : public CurveShape {
 public:
  HelixShape(ShapeSpec spec, bool full) : CurveShape(spec, pieces(spec, full), full ? 16384 : 8192), full_(full) {
    scale_ = spec.param("scale", 1.0);
    u_max_ = spec.param("u_max", 2.0 * kPi);
  }

  bool contains(const Vec& x, double tol) const override {
    if (x.size() != 3 || x[2] < -tol) return false;
    const double u = std::sqrt(std::max(x[2], 0.0) / scale_);
    if (u > u_max_ + tol) return false;
    auto on = [&](double v) {
      return std::abs(x[0] - scale_ * std::cos(v)) <= tol && std::abs(x[1] - scale_ * std::sin(v)) <= tol;
    };
    return on(u) || (full_ && on(-u));
  }

  SampleCloud sample(std::size_t count, std::uint64_t seed) const override {
    const auto us = equispaced_params(0, count);
    SampleCloud cloud;
    cloud.seed = seed;
    cloud.shape_ref = spec().id();
    for (double u : us) cloud.points.push_back(point_on(0, u));
    cloud.fill_distance = chain_fill(0, us);
    return cloud;
  }

  Vec random_point(Rng& rng) const override {
    const double u = rng.uniform(full_ ? -u_max_ : 0.0, u_max_);
    return point_on(0, u);
  }

  std::optional<double> medial_distance(const Vec& a) const override {
    if (!full_) return std::nullopt;
    const double rho = std::hypot(a[0], a[1]);
    return a[2] > 0.0 ? rho : a.norm();
  }

 private:
  static std::vector<CurvePiece> pieces(const ShapeSpec& spec, bool full) {
    const double s = spec.param("scale", 1.0);
    const double um = spec.param("u_max", 2.0 * kPi);
    CurvePiece p;
    p.r = [s](double u) { return Vec(s * make_vec({std::cos(u), std::sin(u), u * u})); };
    p.dr = [s](double u) { return Vec(s * make_vec({-std::sin(u), std::cos(u), 2.0 * u})); };
    p.ddr = [s](double u) { return Vec(s * make_vec({-std::cos(u), -std::sin(u), 2.0})); };
    p.u0 = full ? -um : 0.0;
    p.u1 = um;
    return {p};
  }

  bool full_ = false;
  double scale_ = 1.0;
  double u_max_ = 2.0 * kPi;
};

class SegmentListShape final : public CurveShape {
 public:
  explicit SegmentListShape(ShapeSpec spec) : CurveShape(spec, pieces(spec), 64) {}

  bool contains(const Vec& x, double tol) const override {
    return static_cast<std::size_t>(x.size()) == dim() && distance(x) <= tol;
  }

  SampleCloud sample(std::size_t count, std::uint64_t seed) const override {
    double total = 0.0;
    for (std::size_t k = 0; k < piece_count(); ++k) total += piece_length(k);
    SampleCloud cloud;
    cloud.seed = seed;
    cloud.shape_ref = spec().id();
    double fill = 0.0;
    for (std::size_t k = 0; k < piece_count(); ++k) {
      const auto n = std::max<std::size_t>(
          2, static_cast<std::size_t>(std::llround(static_cast<double>(count) * piece_length(k) / total)));
      const auto us = equispaced_params(k, n);
      for (double u : us) cloud.points.push_back(point_on(k, u));
      fill = std::max(fill, chain_fill(k, us));
    }
    std::sort(cloud.points.begin(), cloud.points.end(), lex_less);
    cloud.points.erase(std::unique(cloud.points.begin(), cloud.points.end(),
                                   [](const Vec& a, const Vec& b) { return a == b; }),
                       cloud.points.end());
    cloud.fill_distance = fill;
    return cloud;
  }

  Vec random_point(Rng& rng) const override {
    double total = 0.0;
    for (std::size_t k = 0; k < piece_count(); ++k) total += piece_length(k);
    double pick = rng.uniform(0.0, total);
    for (std::size_t k = 0; k < piece_count(); ++k) {
      if (pick <= piece_length(k) || k + 1 == piece_count()) return point_on(k, rng.uniform());
      pick -= piece_length(k);
    }
    return point_on(0, 0.0);
  }

 private:
  static std::vector<CurvePiece> pieces(const ShapeSpec& spec) {
    const double s = spec.param("scale", 1.0);
    std::vector<CurvePiece> out;
    for (const auto& seg : spec.segments) {
      const Vec a = s * seg[0];
      const Vec d = s * (seg[1] - seg[0]);
      if (d.norm() == 0.0) throw Error(Errc::invalid_params, "segment_list: degenerate segment");
      CurvePiece p;
      p.r = [a, d](double u) { return Vec(a + u * d); };
      p.dr = [d](double) { return d; };
      p.ddr = [d](double) { return Vec(Vec::Zero(d.size())); };
      out.push_back(std::move(p));
    }
    return out;
  }
};

/// z = sqrt(x^2 + y^2), truncated at r <= radius. Sampled on rings of
/// constant slant spacing with about 2 pi r / spacing points per ring.
class ConeShape final : public Shape {
 public:
  explicit ConeShape(ShapeSpec spec) : Shape(std::move(spec)) {
    radius_ = this->spec().param("radius", 2.0) * this->spec().param("scale", 1.0);
  }

  std::size_t dim() const override { return 3; }
  Box bounds() const override { return {make_vec({-radius_, -radius_, 0.0}), make_vec({radius_, radius_, radius_})}; }

  double distance(const Vec& a) const override { return near_set(a, 0.0).distance; }

  NearSet near_set(const Vec& a, double epsilon) const override {
    NearSet ns;
    ns.epsilon = epsilon;
    const double rho = std::hypot(a[0], a[1]);
    const double r = std::clamp(0.5 * (rho + a[2]), 0.0, radius_);
    if (rho <= 1e-14 * radius_ && r > 0.0) {
      // On the axis the minimizers form a full circle.
      constexpr int kRing = 64;
      for (int k = 0; k < kRing; ++k) {
        const double th = 2.0 * kPi * k / kRing;
        ns.members.push_back(make_vec({r * std::cos(th), r * std::sin(th), r}));
      }
      ns.distance = std::hypot(r - rho, a[2] - r);
      ns.continuum = true;
      finalize_near_set(ns, a, true);
      return ns;
    }
    Vec m = make_vec({0.0, 0.0, r});
    if (rho > 0.0) {
      m[0] = r * a[0] / rho;
      m[1] = r * a[1] / rho;
    }
    ns.distance = (a - m).norm();
    ns.members.push_back(std::move(m));
    finalize_near_set(ns, a, false);
    return ns;
  }

  bool contains(const Vec& x, double tol) const override {
    if (x.size() != 3) return false;
    const double rho = std::hypot(x[0], x[1]);
    return std::abs(x[2] - rho) <= tol && rho <= radius_ + tol;
  }

  SampleCloud sample(std::size_t count, std::uint64_t seed) const override {
    // Ring k carries max(3, round(2 pi k / sqrt 2)) points, independent of
    // the radius; pick the largest ring count that fits in `count`.
    auto ring_points = [](std::size_t k) -> std::size_t {
      if (k == 0) return 1;
      return std::max<std::size_t>(3, static_cast<std::size_t>(std::llround(2.0 * kPi * k / std::numbers::sqrt2)));
    };
    std::size_t rings = 1, total = 1 + ring_points(1);
    while (total + ring_points(rings + 1) <= count) total += ring_points(++rings);

    Rng rng(seed);
    SampleCloud cloud;
    cloud.seed = seed;
    cloud.shape_ref = spec().id();
    cloud.points.push_back(make_vec({0.0, 0.0, 0.0}));
    for (std::size_t k = 1; k <= rings; ++k) {
      const double r = radius_ * static_cast<double>(k) / static_cast<double>(rings);
      const std::size_t n = ring_points(k);
      const double phase = rng.uniform() * 2.0 * kPi / static_cast<double>(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double th = phase + 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
        cloud.points.push_back(make_vec({r * std::cos(th), r * std::sin(th), r}));
      }
    }

    // Fill estimate: probes between rings and between ring neighbours, plus
    // random surface points, against an exact nearest-neighbour index.
    const SpatialIndex index(SampleCloud{cloud.points, 0.0, seed, cloud.shape_ref});
    const double dr = radius_ / static_cast<double>(rings);
    double fill = 0.0;
    for (std::size_t k = 0; k < rings; ++k) {
      for (double frac : {0.5, 1.0}) {
        const double r = (static_cast<double>(k) + frac) * dr;
        const std::size_t n = 4 * ring_points(k + 1);
        for (std::size_t j = 0; j < n; ++j) {
          const double th = 2.0 * kPi * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
          fill = std::max(fill, index.distance(make_vec({r * std::cos(th), r * std::sin(th), r})));
        }
      }
    }
    Rng probe(seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) fill = std::max(fill, index.distance(random_point(probe)));
    cloud.fill_distance = fill;
    return cloud;
  }

  Vec random_point(Rng& rng) const override {
    const double r = radius_ * std::sqrt(rng.uniform());
    const double th = rng.uniform(0.0, 2.0 * kPi);
    return make_vec({r * std::cos(th), r * std::sin(th), r});
  }

  std::optional<double> medial_distance(const Vec& a) const override {
    const double rho = std::hypot(a[0], a[1]);
    return a[2] > 0.0 ? rho : a.norm();
  }

 private:
  double radius_ = 2.0;
};

/// A user-supplied sample; no exact oracle.
class PointCloudShape final : public Shape {
 public:
  explicit PointCloudShape(ShapeSpec spec) : Shape(std::move(spec)) {
    if (this->spec().points.empty()) throw Error(Errc::empty_cloud, "point_cloud shape without points");
    bounds_ = bounding_box(this->spec().points);
  }

  std::size_t dim() const override { return static_cast<std::size_t>(spec().points.front().size()); }
  Box bounds() const override { return bounds_; }
  bool has_exact_oracle() const override { return false; }

  double distance(const Vec&) const override { unavailable(); }
  NearSet near_set(const Vec&, double) const override { unavailable(); }

  bool contains(const Vec& x, double tol) const override {
    return std::any_of(spec().points.begin(), spec().points.end(), [&](const Vec& p) { return (p - x).norm() <= tol; });
  }

  SampleCloud sample(std::size_t /*count*/, std::uint64_t seed) const override {
    SampleCloud cloud;
    cloud.seed = seed;
    cloud.shape_ref = spec().id();
    cloud.points = spec().points;
    if (auto it = spec().params.find("fill_distance"); it != spec().params.end()) {
      cloud.fill_distance = it->second;
      return cloud;
    }
    // Half the largest nearest-neighbour gap.
    const SpatialIndex index(SampleCloud{cloud.points, 0.0, seed, cloud.shape_ref});
    double gap = 0.0;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      const auto nn = index.k_nearest(cloud.points[i], 2);
      if (nn.size() == 2) gap = std::max(gap, (cloud.points[nn[1]] - cloud.points[i]).norm());
    }
    cloud.fill_distance = 0.5 * gap;
    return cloud;
  }

  Vec random_point(Rng& rng) const override { return spec().points[rng.index(spec().points.size())]; }

 private:
  [[noreturn]] static void unavailable() {
    throw Error(Errc::oracle_unavailable, "point_cloud shapes have no exact closest-point oracle");
  }

  Box bounds_;
};

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::half_helix: return "half_helix";
    case ShapeKind::full_helix: return "full_helix";
    case ShapeKind::circle: return "circle";
    case ShapeKind::two_points: return "two_points";
    case ShapeKind::cusp: return "cusp";
    case ShapeKind::cone: return "cone";
    case ShapeKind::point_cloud: return "point_cloud";
    case ShapeKind::segment_list: return "segment_list";
  }
  return "unknown";
}

ShapeKind parse_shape_kind(std::string_view name) {
  for (auto k : {ShapeKind::half_helix, ShapeKind::full_helix, ShapeKind::circle, ShapeKind::two_points,
                 ShapeKind::cusp, ShapeKind::cone, ShapeKind::point_cloud, ShapeKind::segment_list}) {
    if (to_string(k) == name) return k;
  }
  throw Error(Errc::unknown_kind, "unknown shape kind '" + std::string(name) + "'");
}

double ShapeSpec::param(const std::string& name, double fallback) const {
  const auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

std::string ShapeSpec::id() const {
  std::ostringstream os;
  os << to_string(kind) << '(';
  bool first = true;
  for (const auto& [k, v] : params) {
    os << (first ? "" : ",") << k << '=' << v;
    first = false;
  }
  if (kind == ShapeKind::segment_list) os << (first ? "" : ",") << "segments=" << segments.size();
  if (kind == ShapeKind::point_cloud) os << (first ? "" : ",") << "points=" << points.size();
  os << ')';
  return os.str();
}

NearSet Shape::exact_nearest(const Vec& a) const {
  if (!has_exact_oracle()) {
    throw Error(Errc::oracle_unavailable, std::string(to_string(kind())) + " has no exact closest-point oracle");
  }
  return near_set(a, 0.0);
}

double Shape::max_fill() const { return spec().param("max_fill", 0.1 * scale()); }

std::unique_ptr<Shape> make_shape(const ShapeSpec& spec) {
  const auto& allowed = allowed_params().at(spec.kind);
  for (const auto& [name, value] : spec.params) {
    if (name == "scale" || name == "max_fill") continue;
    if (!allowed.count(name)) {
      throw Error(Errc::invalid_params,
                  std::string(to_string(spec.kind)) + ": unrecognized parameter '" + name + "'");
    }
    if (!std::isfinite(value)) throw Error(Errc::invalid_params, "parameter '" + name + "' is not finite");
  }
  require_positive(spec, "scale", 1.0);
  const int natural = natural_dim(spec);
  if (natural == 0) throw Error(Errc::invalid_params, std::string(to_string(spec.kind)) + ": no geometry given");
  if (spec.ambient_dim != 0 && spec.ambient_dim != natural) {
    throw Error(Errc::invalid_params, std::string(to_string(spec.kind)) + " lives in dimension " +
                                          std::to_string(natural) + ", not " + std::to_string(spec.ambient_dim));
  }
  switch (spec.kind) {
    case ShapeKind::circle:
      require_positive(spec, "radius", 1.0);
      return std::make_unique<CircleShape>(spec);
    case ShapeKind::two_points: return std::make_unique<TwoPointsShape>(spec);
    case ShapeKind::cusp:
      require_positive(spec, "t_max", 1.0);
      return std::make_unique<CuspShape>(spec);
    case ShapeKind::half_helix:
    case ShapeKind::full_helix:
      require_positive(spec, "u_max", 2.0 * kPi);
      return std::make_unique<HelixShape>(spec, spec.kind == ShapeKind::full_helix);
    case ShapeKind::cone:
      require_positive(spec, "radius", 2.0);
      return std::make_unique<ConeShape>(spec);
    case ShapeKind::segment_list:
      for (const auto& s : spec.segments) {
        if (s[0].size() != natural || s[1].size() != natural) {
          throw Error(Errc::invalid_params, "segment_list: mixed dimensions");
        }
      }
      return std::make_unique<SegmentListShape>(spec);
    case ShapeKind::point_cloud:
      for (const auto& p : spec.points) {
        if (p.size() != natural) throw Error(Errc::invalid_params, "point_cloud: mixed dimensions");
      }
      return std::make_unique<PointCloudShape>(spec);
  }
  throw Error(Errc::unknown_kind, "unhandled shape kind");
}

SampleCloud sample_shape(const Shape& shape, std::size_t count, std::uint64_t seed) {
  if (count < 2) throw Error(Errc::refinement, "sample count must be at least 2");
  auto cloud = shape.sample(count, seed);
  if (cloud.fill_distance > shape.max_fill()) {
    std::ostringstream os;
    os << "fill distance " << cloud.fill_distance << " of " << count << " samples exceeds the ceiling "
       << shape.max_fill() << "; increase the sample count";
    throw Error(Errc::refinement, os.str());
  }
  return cloud;
}

std::vector<Vec> read_point_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::io, "point CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t dim = 0;
  {
    std::istringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) {
      if (cell != "x" + std::to_string(dim)) {
        throw Error(Errc::io, "point CSV header must be x0,...,x{n-1}; got '" + line + "'");
      }
      ++dim;
    }
  }
  if (dim == 0) throw Error(Errc::io, "point CSV header names no columns");
  std::vector<Vec> points;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    Vec p(static_cast<Eigen::Index>(dim));
    std::size_t i = 0;
    while (std::getline(cells, cell, ',')) {
      if (i >= dim) throw Error(Errc::io, "row " + std::to_string(row) + " has too many columns");
      try {
        std::size_t used = 0;
        p[static_cast<Eigen::Index>(i)] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(Errc::io, "row " + std::to_string(row) + ": '" + cell + "' is not a number");
      }
      ++i;
    }
    if (i != dim) throw Error(Errc::io, "row " + std::to_string(row) + " has too few columns");
    points.push_back(std::move(p));
  }
  // Duplicate rows would give zero-length graph edges.
  std::sort(points.begin(), points.end(), lex_less);
  points.erase(std::unique(points.begin(), points.end(), [](const Vec& a, const Vec& b) { return a == b; }),
               points.end());
  return points;
}

std::vector<Vec> read_point_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open '" + path + "'");
  return read_point_csv(in);
}

void write_point_csv(std::ostream& out, std::span<const Vec> points) {
  if (points.empty()) return;
  const auto dim = points.front().size();
  for (Eigen::Index i = 0; i < dim; ++i) out << (i ? "," : "") << 'x' << i;
  out << '\n';
  out.precision(17);
  for (const auto& p : points) {
    for (Eigen::Index i = 0; i < dim; ++i) out << (i ? "," : "") << p[i];
    out << '\n';
  }
}

}  // namespace medlab
