#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "medlab/geometry.hpp"
#include "medlab/shapes.hpp"

namespace medlab {

/// Near-set slack, medial threshold and continuum tolerance used to decide
/// whether the closest-point map is single valued at a query.
struct Thresholds {
  double epsilon = 0.0;
  double lambda = 0.0;
  /// Minimum deficit 1 - |mean unit direction to members| for a single
  /// connected near-set to count as a continuum of minimizers.
  double coherence = 0.1;

  /// epsilon = 2 h, lambda = 10 h for fill distance h, floored at 1e-12 and
  /// 1e-6 of the oracle's scale so exact oracles get usable values.
  static Thresholds defaults_for(const ClosestPointOracle& oracle, double epsilon_factor = 2.0,
                                 double lambda_factor = 10.0);
};

struct IndexOptions {
  /// Single-linkage radius for near-set clusters, in units of fill distance.
  double link_factor = 4.0;
};

/// Exact nearest-neighbour structure over a SampleCloud: a k-d tree split at
/// coordinate medians along the widest axis. Immutable after construction.
class SpatialIndex final : public ClosestPointOracle {
 public:
  explicit SpatialIndex(SampleCloud cloud, IndexOptions options = {});

  const SampleCloud& cloud() const { return cloud_; }
  std::size_t size() const { return cloud_.points.size(); }
  const Vec& point(std::size_t i) const { return cloud_.points[i]; }
  double link_radius() const { return options_.link_factor * cloud_.fill_distance; }

  std::size_t dim() const override { return dim_; }
  double resolution() const override { return cloud_.fill_distance; }
  Box bounds() const override { return bounds_; }

  double distance(const Vec& a) const override;
  NearSet near_set(const Vec& a, double epsilon) const override;

  /// Index of a closest sample; ties go to the lexicographically smallest.
  std::size_t nearest(const Vec& a) const;
  std::vector<std::size_t> k_nearest(const Vec& a, std::size_t k) const;
  /// Indices with |p - a| <= radius, ascending.
  std::vector<std::size_t> within(const Vec& a, double radius) const;

  /// Linear-scan reference for `nearest`.
  std::size_t nearest_linear(const Vec& a) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  double sq_dist(std::uint32_t slot, const Vec& a) const;
  double box_sq_dist(std::int32_t node, const Vec& a) const;
  void check_dim(const Vec& a) const;

  SampleCloud cloud_;
  IndexOptions options_;
  std::size_t dim_ = 0;
  Box bounds_;
  std::vector<std::uint32_t> perm_;  // tree slot -> cloud index
  std::vector<double> coords_;       // coordinates in slot order
  std::vector<Node> nodes_;
  std::vector<double> boxes_;  // per node: lo then hi
};

/// How far a near-set is from a single point.
struct Multivaluedness {
  bool flag = false;
  /// Separation of the witness pair: nearest members of the two farthest
  /// clusters, or the diameter pair of a single continuum cluster.
  double separation = 0.0;
  double coherence_deficit = 0.0;
  std::size_t witness_a = 0;
  std::size_t witness_b = 0;
};

Multivaluedness assess_near_set(const NearSet& ns, const Vec& query, const Thresholds& thr);

/// Centroid of the near-set members: the numerical m(a) where m is single valued.
Vec representative(const NearSet& ns);

/// m(a), or Errc::medial_point when the near-set is multivalued.
Vec closest_point(const ClosestPointOracle& oracle, const Vec& a, const Thresholds& thr);

/// (a - m(a)) / d(a).
Vec grad_distance(const ClosestPointOracle& oracle, const Vec& a, const Thresholds& thr);

/// Central difference (m(x(t+h)) - m(x(t-h))) / 2h of the closest-point map
/// restricted to the line x(t) = base + t * direction (direction normalized).
Vec jacobian_along_line(const ClosestPointOracle& oracle, const Vec& base, const Vec& direction, double t, double h,
                        const Thresholds& thr);

std::vector<double> batch_distance(const ClosestPointOracle& oracle, std::span<const Vec> queries);
std::vector<double> batch_distance_serial(const ClosestPointOracle& oracle, std::span<const Vec> queries);

/// CSV with columns x0..x{n-1},distance,spread,member_count.
void write_query_trace(std::ostream& out, const ClosestPointOracle& oracle, std::span<const Vec> queries,
                       double epsilon);

}  // namespace medlab
