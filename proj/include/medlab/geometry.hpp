#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace medlab {

using Vec = Eigen::VectorXd;

enum class Errc {
  unknown_kind,
  invalid_params,
  refinement,
  oracle_unavailable,
  empty_cloud,
  undefined_gradient,
  medial_point,
  medial_crossing,
  no_jump,
  multiple_jumps,
  radius_below_floor,
  no_path,
  invalid_region,
  insufficient_points,
  not_on_shape,
  invalid_config,
  io,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Axis-aligned box in R^n.
struct Box {
  Vec lo;
  Vec hi;

  std::size_t dim() const { return static_cast<std::size_t>(lo.size()); }
  bool contains(const Vec& x, double tol = 0.0) const;
  double diagonal() const { return (hi - lo).norm(); }
  Box inflated(double margin) const;
};

Box bounding_box(std::span<const Vec> points);

/// Result of a closest-point query: d(a, X) and the points of X within
/// d(a, X) + epsilon.
///
/// `clusters` partitions `members` into connected pieces (indices into
/// `members`). For a sampled set the pieces come from single linkage at the
/// cloud's link radius; for an analytic set each isolated minimizer is its own
/// piece and a continuum of minimizers is one piece with `continuum` set.
struct NearSet {
  double distance = 0.0;
  double epsilon = 0.0;
  std::vector<Vec> members;
  double spread = 0.0;
  bool continuum = false;
  std::vector<std::vector<std::size_t>> clusters;

  /// Member closest to the query (first in lexicographic order on ties).
  std::size_t anchor = 0;
};

/// Anything that can answer d(a, X) and the near-set of a.
class ClosestPointOracle {
 public:
  virtual ~ClosestPointOracle() = default;

  virtual std::size_t dim() const = 0;
  virtual double distance(const Vec& a) const = 0;
  virtual NearSet near_set(const Vec& a, double epsilon) const = 0;

  /// Sampling resolution (fill distance); 0 for exact oracles.
  virtual double resolution() const = 0;
  virtual Box bounds() const = 0;
  double scale() const;
};

/// Lexicographic order on coordinates.
bool lex_less(const Vec& a, const Vec& b);

/// Max pairwise distance; writes the achieving pair when requested.
double diameter(std::span<const Vec> points, std::pair<std::size_t, std::size_t>* arg = nullptr);

Vec centroid(std::span<const Vec> points);
Vec centroid(std::span<const Vec> points, std::span<const std::size_t> subset);

/// Sorts members lexicographically and fills spread and anchor. Clusters are
/// reset to one per member unless `single_cluster` is set.
void finalize_near_set(NearSet& ns, const Vec& query, bool single_cluster);

/// Groups members by single linkage at the given radius.
void link_clusters(NearSet& ns, double link_radius);

Vec make_vec(std::initializer_list<double> values);
std::vector<double> to_std(const Vec& v);
Vec from_std(const std::vector<double>& v);

/// Seeded generator shared by every sampler so runs are reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

  Vec unit_vector(std::size_t dim);
  Vec in_ball(const Vec& center, double radius);
  Vec in_box(const Box& box);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace medlab
