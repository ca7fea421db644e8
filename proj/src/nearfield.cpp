#include "medlab/nearfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>

namespace medlab {

namespace {

constexpr std::uint32_t kLeafSize = 8;

}  // namespace

Thresholds Thresholds::defaults_for(const ClosestPointOracle& oracle, double epsilon_factor, double lambda_factor) {
  const double h = oracle.resolution();
  const double s = oracle.scale();
  Thresholds t;
  t.epsilon = std::max(epsilon_factor * h, 1e-12 * s);
  t.lambda = std::max(lambda_factor * h, 1e-6 * s);
  return t;
}

// ---------------------------------------------------------------------------
// SpatialIndex
// ---------------------------------------------------------------------------

SpatialIndex::SpatialIndex(SampleCloud cloud, IndexOptions options)
    : cloud_(std::move(cloud)), options_(options) {
  if (cloud_.points.empty()) throw Error(Errc::empty_cloud, "cannot index an empty cloud");
  dim_ = static_cast<std::size_t>(cloud_.points.front().size());
  for (const auto& p : cloud_.points) {
    if (static_cast<std::size_t>(p.size()) != dim_) throw Error(Errc::invalid_params, "cloud mixes dimensions");
  }
  bounds_ = bounding_box(cloud_.points);
  const auto n = static_cast<std::uint32_t>(cloud_.points.size());
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), 0U);
  nodes_.reserve(2 * (n / kLeafSize + 1));
  build(0, n);
  coords_.resize(static_cast<std::size_t>(n) * dim_);
  for (std::uint32_t s = 0; s < n; ++s) {
    const auto& p = cloud_.points[perm_[s]];
    for (std::size_t k = 0; k < dim_; ++k) coords_[s * dim_ + k] = p[static_cast<Eigen::Index>(k)];
  }
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, 0.0, -1, -1});

  Vec lo = cloud_.points[perm_[begin]];
  Vec hi = lo;
  for (auto s = begin; s < end; ++s) {
    lo = lo.cwiseMin(cloud_.points[perm_[s]]);
    hi = hi.cwiseMax(cloud_.points[perm_[s]]);
  }
  boxes_.resize(nodes_.size() * 2 * dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    boxes_[static_cast<std::size_t>(id) * 2 * dim_ + k] = lo[static_cast<Eigen::Index>(k)];
    boxes_[static_cast<std::size_t>(id) * 2 * dim_ + dim_ + k] = hi[static_cast<Eigen::Index>(k)];
  }
  if (end - begin <= kLeafSize) return id;

  Eigen::Index axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const auto mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                   [&](std::uint32_t x, std::uint32_t y) {
                     const double cx = cloud_.points[x][axis];
                     const double cy = cloud_.points[y][axis];
                     return cx < cy || (cx == cy && x < y);
                   });
  const double split = cloud_.points[perm_[mid]][axis];
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].axis = static_cast<std::int32_t>(axis);
  nodes_[static_cast<std::size_t>(id)].split = split;
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double SpatialIndex::box_sq_dist(std::int32_t id, const Vec& a) const {
  const double* lo = boxes_.data() + static_cast<std::size_t>(id) * 2 * dim_;
  const double* hi = lo + dim_;
  double s = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    const double x = a[static_cast<Eigen::Index>(k)];
    const double d = x < lo[k] ? lo[k] - x : (x > hi[k] ? x - hi[k] : 0.0);
    s += d * d;
  }
  return s;
}

double SpatialIndex::sq_dist(std::uint32_t slot, const Vec& a) const {
  const double* p = coords_.data() + static_cast<std::size_t>(slot) * dim_;
  double s = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    const double d = p[k] - a[static_cast<Eigen::Index>(k)];
    s += d * d;
  }
  return s;
}

void SpatialIndex::check_dim(const Vec& a) const {
  if (static_cast<std::size_t>(a.size()) != dim_) {
    throw Error(Errc::invalid_params, "query dimension " + std::to_string(a.size()) + " does not match cloud dimension " +
                                          std::to_string(dim_));
  }
}

std::size_t SpatialIndex::nearest(const Vec& a) const {
  check_dim(a);
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_slot = 0;
  // Depth-first with the near child visited first.
  struct Frame {
    std::int32_t node;
    double bound;
  };
  std::vector<Frame> frames;
  frames.reserve(64);
  frames.push_back({0, 0.0});
  while (!frames.empty()) {
    const auto [id, bound] = frames.back();
    frames.pop_back();
    if (bound > best) continue;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.axis < 0) {
      for (auto s = node.begin; s < node.end; ++s) {
        const double d2 = sq_dist(s, a);
        if (d2 < best || (d2 == best && lex_less(cloud_.points[perm_[s]], cloud_.points[perm_[best_slot]]))) {
          best = d2;
          best_slot = s;
        }
      }
      continue;
    }
    const double diff = a[node.axis] - node.split;
    auto near_child = diff <= 0.0 ? node.left : node.right;
    auto far_child = diff <= 0.0 ? node.right : node.left;
    double far_bound = box_sq_dist(far_child, a);
    double near_bound = box_sq_dist(near_child, a);
    if (far_bound < near_bound) {
      std::swap(far_child, near_child);
      std::swap(far_bound, near_bound);
    }
    if (far_bound <= best) frames.push_back({far_child, far_bound});
    if (near_bound <= best) frames.push_back({near_child, near_bound});
  }
  return perm_[best_slot];
}

std::size_t SpatialIndex::nearest_linear(const Vec& a) const {
  check_dim(a);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < cloud_.points.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double d = cloud_.points[i][static_cast<Eigen::Index>(k)] - a[static_cast<Eigen::Index>(k)];
      d2 += d * d;
    }
    if (d2 < best || (d2 == best && lex_less(cloud_.points[i], cloud_.points[best_i]))) {
      best = d2;
      best_i = i;
    }
  }
  return best_i;
}

std::vector<std::size_t> SpatialIndex::k_nearest(const Vec& a, std::size_t k) const {
  check_dim(a);
  using Entry = std::pair<double, std::uint32_t>;
  std::priority_queue<Entry> heap;  // max-heap of the k best
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (node.axis < 0) {
      for (auto s = node.begin; s < node.end; ++s) {
        const double d2 = sq_dist(s, a);
        if (heap.size() < k) {
          heap.emplace(d2, perm_[s]);
        } else if (d2 < heap.top().first) {
          heap.pop();
          heap.emplace(d2, perm_[s]);
        }
      }
      continue;
    }
    const double diff = a[node.axis] - node.split;
    const auto near_child = diff <= 0.0 ? node.left : node.right;
    const auto far_child = diff <= 0.0 ? node.right : node.left;
    if (heap.size() < k || box_sq_dist(far_child, a) <= heap.top().first) stack.push_back(far_child);
    if (heap.size() < k || box_sq_dist(near_child, a) <= heap.top().first) stack.push_back(near_child);
  }
  std::vector<Entry> sorted;
  while (!heap.empty()) {
    sorted.push_back(heap.top());
    heap.pop();
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> out;
  for (const auto& e : sorted) out.push_back(e.second);
  return out;
}

std::vector<std::size_t> SpatialIndex::within(const Vec& a, double radius) const {
  check_dim(a);
  const double r2 = radius * radius;
  std::vector<std::size_t> out;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (node.axis < 0) {
      for (auto s = node.begin; s < node.end; ++s) {
        if (sq_dist(s, a) <= r2) out.push_back(perm_[s]);
      }
      continue;
    }
    if (box_sq_dist(node.left, a) <= r2) stack.push_back(node.left);
    if (box_sq_dist(node.right, a) <= r2) stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double SpatialIndex::distance(const Vec& a) const { return (point(nearest(a)) - a).norm(); }

NearSet SpatialIndex::near_set(const Vec& a, double epsilon) const {
  NearSet ns;
  ns.epsilon = epsilon;
  const std::size_t best = nearest(a);
  ns.distance = (point(best) - a).norm();
  // The radius is widened by a few ulps so the nearest sample always passes
  // the test despite the sqrt round trip.
  const double r = (ns.distance + epsilon) * (1.0 + 4.0 * std::numeric_limits<double>::epsilon());
  for (auto i : within(a, r)) ns.members.push_back(point(i));
  finalize_near_set(ns, a, false);
  if (link_radius() > 0.0) link_clusters(ns, link_radius());
  return ns;
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

Multivaluedness assess_near_set(const NearSet& ns, const Vec& query, const Thresholds& thr) {
  Multivaluedness out;
  if (ns.members.size() < 2) return out;

  // Continuum test on the members within d + min(eps, d / 10): a ring of
  // minimizers survives the cut, the eps-cap around a single foot point
  // shrinks with it.
  const double tight = ns.distance + std::min(ns.epsilon, 0.1 * ns.distance) + 1e-12 * std::max(1.0, ns.distance);
  std::vector<std::size_t> core;
  Vec mean = Vec::Zero(query.size());
  for (std::size_t i = 0; i < ns.members.size(); ++i) {
    const double n = (ns.members[i] - query).norm();
    if (n > tight) continue;
    core.push_back(i);
    if (n > 0.0) mean += (ns.members[i] - query) / n;
  }
  if (!core.empty()) out.coherence_deficit = 1.0 - mean.norm() / static_cast<double>(core.size());

  if (ns.clusters.size() >= 2) {
    // Nearest member of each cluster.
    std::vector<std::size_t> reps;
    for (const auto& c : ns.clusters) {
      std::size_t best = c.front();
      for (auto i : c) {
        if ((ns.members[i] - query).squaredNorm() < (ns.members[best] - query).squaredNorm()) best = i;
      }
      reps.push_back(best);
    }
    for (std::size_t i = 0; i < reps.size(); ++i) {
      for (std::size_t j = i + 1; j < reps.size(); ++j) {
        const double sep = (ns.members[reps[i]] - ns.members[reps[j]]).norm();
        if (sep > out.separation) {
          out.separation = sep;
          out.witness_a = reps[i];
          out.witness_b = reps[j];
        }
      }
    }
    if (out.separation >= thr.lambda) {
      out.flag = true;
      return out;
    }
  }
  if (core.size() < 2 || out.coherence_deficit < thr.coherence) return out;
  double core_spread = 0.0;
  for (std::size_t i = 0; i < core.size(); ++i) {
    for (std::size_t j = i + 1; j < core.size(); ++j) {
      const double sep = (ns.members[core[i]] - ns.members[core[j]]).norm();
      if (sep > core_spread) {
        core_spread = sep;
        out.witness_a = core[i];
        out.witness_b = core[j];
      }
    }
  }
  if (core_spread >= thr.lambda) {
    out.separation = core_spread;
    out.flag = true;
  }
  return out;
}

Vec representative(const NearSet& ns) { return centroid(ns.members); }

Vec closest_point(const ClosestPointOracle& oracle, const Vec& a, const Thresholds& thr) {
  const auto ns = oracle.near_set(a, thr.epsilon);
  if (assess_near_set(ns, a, thr).flag) throw Error(Errc::medial_point, "closest point is not unique here");
  return representative(ns);
}

Vec grad_distance(const ClosestPointOracle& oracle, const Vec& a, const Thresholds& thr) {
  const auto ns = oracle.near_set(a, thr.epsilon);
  if (ns.distance <= thr.epsilon) {
    throw Error(Errc::undefined_gradient, "query lies on the set (d = " + std::to_string(ns.distance) + ")");
  }
  const auto mv = assess_near_set(ns, a, thr);
  if (mv.flag) {
    throw Error(Errc::medial_point, "gradient undefined: near-set separation " + std::to_string(mv.separation));
  }
  return (a - representative(ns)) / ns.distance;
}

Vec jacobian_along_line(const ClosestPointOracle& oracle, const Vec& base, const Vec& direction, double t, double h,
                        const Thresholds& thr) {
  if (!(h > 0.0)) throw Error(Errc::invalid_params, "finite-difference step must be positive");
  const Vec dir = direction.normalized();
  Vec images[3];
  const double ts[3] = {t - h, t, t + h};
  for (int k = 0; k < 3; ++k) {
    const Vec x = base + ts[k] * dir;
    const auto ns = oracle.near_set(x, thr.epsilon);
    if (assess_near_set(ns, x, thr).flag) {
      throw Error(Errc::medial_crossing, "stencil point t = " + std::to_string(ts[k]) + " is medial");
    }
    images[k] = representative(ns);
  }
  return (images[2] - images[0]) / (2.0 * h);
}

std::vector<double> batch_distance(const ClosestPointOracle& oracle, std::span<const Vec> queries) {
  std::vector<double> out(queries.size());
  const auto n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = oracle.distance(queries[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<double> batch_distance_serial(const ClosestPointOracle& oracle, std::span<const Vec> queries) {
  std::vector<double> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(oracle.distance(q));
  return out;
}

void write_query_trace(std::ostream& out, const ClosestPointOracle& oracle, std::span<const Vec> queries,
                       double epsilon) {
  const auto dim = oracle.dim();
  for (std::size_t k = 0; k < dim; ++k) out << 'x' << k << ',';
  out << "distance,spread,member_count\n";
  out.precision(12);
  for (const auto& q : queries) {
    const auto ns = oracle.near_set(q, epsilon);
    for (Eigen::Index k = 0; k < q.size(); ++k) out << q[k] << ',';
    out << ns.distance << ',' << ns.spread << ',' << ns.members.size() << '\n';
  }
}

}  // namespace medlab
