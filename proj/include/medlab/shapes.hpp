#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medlab/geometry.hpp"

namespace medlab {

enum class ShapeKind { half_helix, full_helix, circle, two_points, cusp, cone, point_cloud, segment_list };

std::string_view to_string(ShapeKind kind);
ShapeKind parse_shape_kind(std::string_view name);

/// Description of a closed set X. Catalog kinds read their geometry from
/// `params`; `segments` and `points` carry the explicit data of
/// segment_list and point_cloud.
///
/// Recognized params (defaults in parentheses), all kinds also take
/// `scale` (1) and `max_fill` (0.1 * bounding-box diagonal):
///   circle      radius (1)
///   two_points  ax (-1) ay (0) bx (1) by (0)
///   cusp        t_max (1)             X = {(t, +-t^(3/2)) : 0 <= t <= t_max}
///   half_helix  u_max (2 pi)          X = {(cos u, sin u, u^2) : 0 <= u <= u_max}
///   full_helix  u_max (2 pi)          same with -u_max <= u <= u_max
///   cone        radius (2)            X = {z = sqrt(x^2 + y^2) <= radius}
///   point_cloud fill_distance (estimated from nearest-neighbour gaps)
struct ShapeSpec {
  ShapeKind kind = ShapeKind::circle;
  std::map<std::string, double> params;
  int ambient_dim = 0;  // 0 selects the kind's natural dimension
  std::vector<std::array<Vec, 2>> segments;
  std::vector<Vec> points;

  double param(const std::string& name, double fallback) const;
  std::string id() const;
};

struct SampleCloud {
  std::vector<Vec> points;
  double fill_distance = 0.0;
  std::uint64_t seed = 0;
  std::string shape_ref;

  std::size_t dim() const { return points.empty() ? 0 : static_cast<std::size_t>(points.front().size()); }
  std::size_t size() const { return points.size(); }
};

inline constexpr double kMembershipTolerance = 1e-12;

/// A closed set with a sampler and, for catalog kinds, exact closest-point
/// queries. As an oracle, near_set(a, eps) returns every local minimizer of
/// the distance whose value is within d(a) + eps.
class Shape : public ClosestPointOracle {
 public:
  explicit Shape(ShapeSpec spec) : spec_(std::move(spec)) {}

  ShapeKind kind() const { return spec_.kind; }
  const ShapeSpec& spec() const { return spec_; }

  virtual bool contains(const Vec& x, double tol = kMembershipTolerance) const = 0;
  virtual SampleCloud sample(std::size_t count, std::uint64_t seed) const = 0;
  virtual Vec random_point(Rng& rng) const = 0;
  virtual bool has_exact_oracle() const { return true; }

  /// Distance to the known medial component, where one is known in closed
  /// form (circle centre, bisector of two points, cusp and cone axes, full
  /// helix axis). Truncation adds further medial points far from the
  /// shape's singular structure; those are not covered.
  virtual std::optional<double> medial_distance(const Vec& /*a*/) const { return std::nullopt; }

  /// Full minimizer set; ties within the membership tolerance count.
  NearSet exact_nearest(const Vec& a) const;

  double resolution() const override { return 0.0; }
  double max_fill() const;

 protected:
  double tie_tolerance() const { return 1e-12 * scale(); }

 private:
  ShapeSpec spec_;
};

std::unique_ptr<Shape> make_shape(const ShapeSpec& spec);

/// Samples `count` points and enforces the shape's fill ceiling.
SampleCloud sample_shape(const Shape& shape, std::size_t count, std::uint64_t seed);

std::vector<Vec> read_point_csv(std::istream& in);
std::vector<Vec> read_point_csv_file(const std::string& path);
void write_point_csv(std::ostream& out, std::span<const Vec> points);

}  // namespace medlab
