#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "medlab/geometry.hpp"
#include "medlab/innermetric.hpp"
#include "medlab/medial.hpp"
#include "medlab/nearfield.hpp"

namespace medlab {

/// Probe region V. A ball B(center, radius), an annulus when inner_radius > 0,
/// or the segment center + s * axis, |s| <= radius, when axis is set.
struct ProbeRegion {
  Vec center;
  double radius = 0.0;
  double inner_radius = 0.0;
  std::optional<Vec> axis;
  /// Half the infimum of the distance to the medial set over the region.
  double delta = 0.0;
  /// Supremum of the distance to X over the region.
  double sup_dist = 0.0;

  static ProbeRegion ball(Vec center, double radius);
  static ProbeRegion annulus(Vec center, double inner_radius, double outer_radius);
  static ProbeRegion segment(Vec center, Vec axis, double half_length);

  std::size_t dim() const { return static_cast<std::size_t>(center.size()); }
  bool contains(const Vec& x, double tol = 0.0) const;
  /// Euclidean distance from x to the region.
  double distance_to(const Vec& x) const;
  Box bounds() const;
  Vec sample(Rng& rng) const;
  void validate() const;
};

struct CertifyOptions {
  /// Grid nodes per axis; segment regions use this along the axis and
  /// `cross_resolution` across it.
  int resolution = 101;
  int cross_resolution = 21;
  /// Width of the scanned collar around the region.
  double margin = 0.5;
  /// Adjacent nodes whose images differ by more than this many grid steps
  /// are bisected for a jump.
  double jump_factor = 20.0;
};

struct RegionCertificate {
  MedialScanReport scan;
  /// Jumps of the closest-point map located between adjacent nodes. Edges
  /// are bisected nearest first until none can lower the infimum.
  std::vector<Vec> jump_points;
  std::size_t jump_edges = 0;  // edges bisected
  double min_medial_distance = 0.0;  // +inf when nothing is found
};

/// Sets region.delta and region.sup_dist from a medial scan of the region's
/// bounding box inflated by the margin. Medial points are the flagged nodes
/// plus jumps of the closest-point map between adjacent nodes, located with
/// refine_jump. They are pushed one grid step toward the region before the
/// infimum is taken; the margin caps the infimum.
RegionCertificate certify_region(const ClosestPointOracle& oracle, ProbeRegion& region, const Thresholds& thr,
                                 const CertifyOptions& options = {});

struct LipschitzReport {
  ProbeRegion region;
  Thresholds thresholds;
  double fill_distance = 0.0;
  std::uint64_t seed = 0;
  double empirical_quotient = 0.0;
  double paper_bound = 0.0;
  std::size_t pair_count = 0;
  double min_pair_distance = 0.0;
  double on_set_quotient = 0.0;
  Vec worst_p;
  Vec worst_q;

  bool within_bound() const { return empirical_quotient <= paper_bound; }
};

/// Max of |m(p) - m(q)| / |p - q| over pairs in the region with
/// |p - q| < delta, against 2 (delta + sup_dist) / delta. Pair lengths are
/// drawn from [floor, delta) with floor = max(4 fill, delta / 100).
LipschitzReport lipschitz_quotient(const ClosestPointOracle& oracle, const ProbeRegion& region, std::size_t pair_count,
                                   std::uint64_t seed, const Thresholds& thr);
LipschitzReport lipschitz_quotient_serial(const ClosestPointOracle& oracle, const ProbeRegion& region,
                                          std::size_t pair_count, std::uint64_t seed, const Thresholds& thr);

struct OnSetReport {
  std::size_t pair_count = 0;
  double max_quotient = 0.0;  // max over pairs of max_{xi in m(q)} |p - xi| / |p - q|
  double min_pair_distance = 0.0;
  std::uint64_t seed = 0;
  Vec worst_p;
  Vec worst_q;
};

/// p drawn from the cloud (so p is on X), q = p + s u with u uniform on the
/// sphere and s uniform in [4 fill, max_offset]. Exact minimizers of q only.
OnSetReport on_set_quotient(const SpatialIndex& index, std::size_t pair_count, std::uint64_t seed, double max_offset);

struct LocalLneSample {
  double radius = 0.0;
  double constant = 0.0;
  std::size_t sources = 0;
  std::size_t targets = 0;
  Vec witness_a;
  Vec witness_b;
  double inner = 0.0;
  double outer = 0.0;
};

/// Max of graph distance / Euclidean distance over pairs (s, t) with s in the
/// shell radius/2 <= |s - p| <= radius and t anywhere in B(p, radius), both in
/// the component of the cloud point nearest p and |s - t| >= 4 fill. The
/// innermost and outermost shell points are always sources; up to
/// `source_count` further sources are drawn with `seed`.
LocalLneSample local_lne_constant(const GeodesicGraph& graph, const Vec& p, double radius, std::size_t source_count,
                                  std::uint64_t seed);

enum class LneVerdict { bounded, diverging, inconclusive };

std::string_view to_string(LneVerdict verdict);

struct LneReport {
  Vec point;
  std::vector<double> radii;
  std::vector<double> constants;
  std::vector<LocalLneSample> samples;
  LneVerdict verdict = LneVerdict::inconclusive;
  std::string note;
};

/// Diverging when the constants never decrease as the radius shrinks and the
/// last is at least twice the first; bounded when the last two agree within
/// 20%; inconclusive otherwise.
LneVerdict classify_lne(const std::vector<double>& constants);

LneReport estimate_lne_verdict(const GeodesicGraph& graph, const Vec& p, const std::vector<double>& radii,
                               std::size_t source_count, std::uint64_t seed);

struct TheoremConfig {
  std::vector<double> radii;
  std::size_t source_count = 16;
  int scan_resolution = 41;
  int rectifiable_pairs = 4;
  int projection_steps = 200;
  std::uint64_t seed = 0;
};

struct BallScan {
  double radius = 0.0;
  std::size_t flagged = 0;
  double nearest_medial = 0.0;  // +inf when none
  /// Projection-path check in medial-free balls.
  int paths_tried = 0;
  int paths_ok = 0;
  double longest_path = 0.0;
};

struct TheoremVerdict {
  Vec point;
  LneReport lne;
  std::vector<BallScan> balls;
  bool medial_approach = false;
  bool rectifiable = true;
  bool consistent = true;
  /// Flagged nodes of the largest ball, kept for plotting.
  std::vector<MedialSample> medial_samples;
};

/// Theorem harness: LNE sweep plus medial scans of B(p, r_k). Throws
/// Errc::not_on_shape when p is farther than 2 fill from the cloud.
TheoremVerdict verify_theorem(const GeodesicGraph& graph, const Vec& p, const TheoremConfig& config);

struct ConjectureTrace {
  Vec point;
  std::vector<Vec> medial_points;
  std::vector<std::array<Vec, 2>> witness_pairs;
  std::vector<double> inner;
  std::vector<double> outer;
  std::vector<double> ratios;
  /// Requested points whose near-set is not multivalued.
  std::size_t skipped = 0;
  bool diverges = false;
  bool vacuous = false;
};

/// Witness-pair ratios at the given medial points, in the given order.
ConjectureTrace conjecture_trace(const GeodesicGraph& graph, const Vec& p, const std::vector<Vec>& medial_points,
                                 const Thresholds& thr);

/// Scans B(p, radius) and takes up to `count` flagged nodes at distances
/// spread geometrically from the farthest to the nearest, farthest first.
ConjectureTrace conjecture_probe(const GeodesicGraph& graph, const Vec& p, double radius, std::size_t count,
                                 int resolution, const Thresholds& thr);

/// Ratios at least doubled from the first and increasing over the second half.
bool ratios_diverge(const std::vector<double>& ratios);

}  // namespace medlab
