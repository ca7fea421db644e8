#include "medlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace medlab {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::unknown_kind: return "unknown kind";
    case Errc::invalid_params: return "inconsistent parameters";
    case Errc::refinement: return "refinement error";
    case Errc::oracle_unavailable: return "oracle unavailable";
    case Errc::empty_cloud: return "empty cloud";
    case Errc::undefined_gradient: return "undefined gradient";
    case Errc::medial_point: return "medial point";
    case Errc::medial_crossing: return "medial crossing";
    case Errc::no_jump: return "no jump";
    case Errc::multiple_jumps: return "multiple jumps";
    case Errc::radius_below_floor: return "radius below floor";
    case Errc::no_path: return "no path";
    case Errc::invalid_region: return "invalid region";
    case Errc::insufficient_points: return "insufficient points";
    case Errc::not_on_shape: return "not on shape";
    case Errc::invalid_config: return "invalid config";
    case Errc::io: return "io error";
  }
  return "error";
}

bool Box::contains(const Vec& x, double tol) const {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  }
  return true;
}

Box Box::inflated(double margin) const {
  Box b = *this;
  b.lo.array() -= margin;
  b.hi.array() += margin;
  return b;
}

Box bounding_box(std::span<const Vec> points) {
  if (points.empty()) throw Error(Errc::empty_cloud, "bounding box of an empty point set");
  Box b{points.front(), points.front()};
  for (const auto& p : points) {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  return b;
}

double ClosestPointOracle::scale() const {
  const double diag = bounds().diagonal();
  return diag > 0.0 ? diag : 1.0;
}

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

double diameter(std::span<const Vec> points, std::pair<std::size_t, std::size_t>* arg) {
  double best = 0.0;
  std::pair<std::size_t, std::size_t> where{0, 0};
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d2 = (points[i] - points[j]).squaredNorm();
      if (d2 > best) {
        best = d2;
        where = {i, j};
      }
    }
  }
  if (arg) *arg = where;
  return std::sqrt(best);
}

Vec centroid(std::span<const Vec> points) {
  Vec c = Vec::Zero(points.front().size());
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

Vec centroid(std::span<const Vec> points, std::span<const std::size_t> subset) {
  Vec c = Vec::Zero(points.front().size());
  for (auto i : subset) c += points[i];
  return c / static_cast<double>(subset.size());
}

void finalize_near_set(NearSet& ns, const Vec& query, bool single_cluster) {
  std::sort(ns.members.begin(), ns.members.end(), lex_less);
  ns.spread = diameter(ns.members);
  ns.anchor = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ns.members.size(); ++i) {
    const double d = (ns.members[i] - query).squaredNorm();
    if (d < best) {
      best = d;
      ns.anchor = i;
    }
  }
  ns.clusters.clear();
  if (single_cluster) {
    std::vector<std::size_t> all(ns.members.size());
    std::iota(all.begin(), all.end(), 0);
    ns.clusters.push_back(std::move(all));
  } else {
    for (std::size_t i = 0; i < ns.members.size(); ++i) ns.clusters.push_back({i});
  }
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

void link_clusters(NearSet& ns, double link_radius) {
  const std::size_t m = ns.members.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  const double r2 = link_radius * link_radius;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if ((ns.members[i] - ns.members[j]).squaredNorm() <= r2) {
        const auto a = find_root(parent, i);
        const auto b = find_root(parent, j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  // Clusters are listed in order of their lexicographically first member.
  std::vector<std::size_t> slot(m, m);
  ns.clusters.clear();
  for (std::size_t i = 0; i < m; ++i) {
    const auto root = find_root(parent, i);
    if (slot[root] == m) {
      slot[root] = ns.clusters.size();
      ns.clusters.emplace_back();
    }
    ns.clusters[slot[root]].push_back(i);
  }
}

Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vec Rng::unit_vector(std::size_t dim) {
  Vec v(static_cast<Eigen::Index>(dim));
  double n = 0.0;
  do {
    for (auto& x : v) x = normal();
    n = v.norm();
  } while (n < 1e-12);
  return v / n;
}

Vec Rng::in_ball(const Vec& center, double radius) {
  const auto dim = static_cast<std::size_t>(center.size());
  const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(dim));
  return center + r * unit_vector(dim);
}

Vec Rng::in_box(const Box& box) {
  Vec v(box.lo.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uniform(box.lo[i], box.hi[i]);
  return v;
}

}  // namespace medlab
