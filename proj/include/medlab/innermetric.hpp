#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "medlab/geometry.hpp"
#include "medlab/nearfield.hpp"

namespace medlab {

enum class PathKind { graph_geodesic, projection_path };

std::string_view to_string(PathKind kind);

struct PathEstimate {
  double length = 0.0;
  std::vector<Vec> vertices;
  PathKind kind = PathKind::graph_geodesic;
  std::array<Vec, 2> endpoints;
  /// Segment sample count used (projection_path only).
  int steps = 0;
};

/// Polyline length of `vertices`.
double polyline_length(std::span<const Vec> vertices);

/// Epsilon-neighbourhood graph over an indexed cloud, stored in CSR form.
/// Holds a non-owning pointer to the index, which must outlive the graph.
class GeodesicGraph {
 public:
  /// Throws Errc::radius_below_floor unless connect_radius >= 4 * fill.
  GeodesicGraph(const SpatialIndex& index, double connect_radius);

  const SpatialIndex& index() const { return *index_; }
  double connect_radius() const { return radius_; }
  std::size_t vertex_count() const { return offsets_.size() - 1; }
  std::size_t edge_count() const { return targets_.size() / 2; }
  std::size_t component_count() const { return component_count_; }
  std::uint32_t component(std::size_t vertex) const { return component_[vertex]; }

  /// Neighbours of a vertex, ascending, with their Euclidean edge weights.
  std::span<const std::uint32_t> neighbours(std::size_t vertex) const;
  std::span<const double> weights(std::size_t vertex) const;

  /// Shortest-path lengths from `source` to each entry of `targets`
  /// (+inf when unreachable). Stops once every target is settled.
  std::vector<double> distances_from(std::size_t source, std::span<const std::size_t> targets) const;

  /// Vertex sequence of a shortest path; empty if unreachable.
  std::vector<std::size_t> shortest_path(std::size_t source, std::size_t target, double* length = nullptr) const;

  /// Nearest cloud point, ties broken lexicographically.
  std::size_t snap(const Vec& x) const { return index_->nearest(x); }

 private:
  const SpatialIndex* index_;
  double radius_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> targets_;
  std::vector<double> weights_;
  std::vector<std::uint32_t> component_;
  std::size_t component_count_ = 0;
};

/// Graph-geodesic estimate of d_inn(x, y) between snapped endpoints. Throws
/// Errc::not_on_shape for endpoints farther than 2 * fill from the cloud and
/// Errc::no_path across components.
PathEstimate inner_distance(const GeodesicGraph& graph, const Vec& x, const Vec& y);

std::vector<PathEstimate> inner_distances(const GeodesicGraph& graph, std::span<const std::pair<Vec, Vec>> pairs);
std::vector<PathEstimate> inner_distances_serial(const GeodesicGraph& graph,
                                                 std::span<const std::pair<Vec, Vec>> pairs);

/// Image of the segment [x, y] under the closest-point map, sampled at
/// steps + 1 equispaced points. Throws Errc::medial_crossing at the first
/// flagged sample.
PathEstimate project_segment(const ClosestPointOracle& oracle, const Vec& x, const Vec& y, int steps,
                             const Thresholds& thr);

/// project_segment with steps doubled from `steps` until the length changes
/// by less than rel_tol, up to max_steps.
PathEstimate project_segment_adaptive(const ClosestPointOracle& oracle, const Vec& x, const Vec& y,
                                      const Thresholds& thr, int steps = 200, double rel_tol = 1e-3,
                                      int max_steps = 1 << 15);

/// CSV polyline with columns x0..x{n-1}.
void write_path_csv(std::ostream& out, const PathEstimate& path);

}  // namespace medlab
