#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medlab/geometry.hpp"
#include "medlab/nearfield.hpp"

namespace medlab {

enum class MedialMethod { grid_spread, jump_bisection };

std::string_view to_string(MedialMethod method);

struct MedialSample {
  Vec location;
  double spread = 0.0;
  Vec witness_a;
  Vec witness_b;
  MedialMethod method = MedialMethod::grid_spread;
  /// Final bracket length and bisection count (jump_bisection only).
  double bracket = 0.0;
  int iterations = 0;
};

struct MedialFlag {
  bool flag = false;
  double distance = 0.0;
  double spread = 0.0;
  double separation = 0.0;
  Vec witness_a;
  Vec witness_b;
  /// Near-set representative.
  Vec image;
};

/// Multivaluedness test at a single point. Points on X are never medial.
MedialFlag is_medial(const ClosestPointOracle& oracle, const Vec& a, const Thresholds& thr);

/// Regular grid over a box, optionally masked to a ball. Nodes are placed
/// symmetrically about the box centre so odd resolutions hit it exactly.
struct GridSpec {
  Box box;
  std::vector<int> resolution;
  std::optional<Vec> mask_center;
  double mask_radius = 0.0;

  static GridSpec uniform(const Box& box, int resolution);
  /// Box [c - r, c + r]^n masked to the closed ball B(c, r).
  static GridSpec ball(const Vec& center, double radius, int resolution);

  std::size_t dim() const { return resolution.size(); }
  std::size_t node_count() const;
  Vec node(std::size_t flat) const;
  bool in_mask(const Vec& x) const;
  double step(std::size_t axis) const;
  double max_step() const;
  void validate() const;
};

struct MedialScanReport {
  GridSpec grid;
  Thresholds thresholds;
  double fill_distance = 0.0;
  /// Per node: spread of the near-set, or NaN for masked nodes.
  std::vector<double> node_spread;
  std::vector<unsigned char> node_flag;
  /// Per node: near-set representative, when the scan was asked to keep it.
  std::vector<Vec> node_image;
  std::vector<MedialSample> samples;
  std::map<std::string, double> min_distance_to;
  std::vector<std::string> warnings;

  std::size_t flagged() const { return samples.size(); }
  /// Distance from x to the nearest flagged node (+inf when none).
  double distance_to_samples(const Vec& x) const;
};

MedialScanReport scan_medial(const ClosestPointOracle& oracle, const GridSpec& grid, const Thresholds& thr,
                             const std::map<std::string, Vec>& probes = {}, bool keep_images = false);
MedialScanReport scan_medial_serial(const ClosestPointOracle& oracle, const GridSpec& grid, const Thresholds& thr,
                                    const std::map<std::string, Vec>& probes = {}, bool keep_images = false);

/// Bisects [u, v] keeping a discontinuity of the closest-point map
/// bracketed until the bracket is shorter than tol. A midpoint that is itself
/// flagged medial pins the bracket around it.
MedialSample refine_jump(const ClosestPointOracle& oracle, const Vec& u, const Vec& v, double tol,
                         const Thresholds& thr);

/// CSV with columns x0..x{n-1},spread,flag over unmasked nodes.
void write_scan_csv(std::ostream& out, const MedialScanReport& report);

}  // namespace medlab
