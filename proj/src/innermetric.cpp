#include "medlab/innermetric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>

namespace medlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using QueueEntry = std::pair<double, std::uint32_t>;
using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

}  // namespace

std::string_view to_string(PathKind kind) {
  return kind == PathKind::graph_geodesic ? "graph_geodesic" : "projection_path";
}

double polyline_length(std::span<const Vec> vertices) {
  double len = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i) len += (vertices[i] - vertices[i - 1]).norm();
  return len;
}

// ---------------------------------------------------------------------------
// GeodesicGraph
// ---------------------------------------------------------------------------

GeodesicGraph::GeodesicGraph(const SpatialIndex& index, double connect_radius)
    : index_(&index), radius_(connect_radius) {
  const double floor = 4.0 * index.resolution();
  if (!(connect_radius > 0.0) || connect_radius < floor) {
    throw Error(Errc::radius_below_floor, "connect radius " + std::to_string(connect_radius) +
                                              " is below 4 x fill distance = " + std::to_string(floor));
  }
  const std::size_t n = index.size();
  std::vector<std::vector<std::uint32_t>> adj(n);
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 128)
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (auto j : index.within(index.point(ui), connect_radius)) {
      if (j != ui) adj[ui].push_back(static_cast<std::uint32_t>(j));
    }
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + adj[i].size();
  targets_.reserve(offsets_[n]);
  weights_.reserve(offsets_[n]);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : adj[i]) {
      targets_.push_back(j);
      weights_.push_back((index.point(i) - index.point(j)).norm());
    }
  }

  component_.assign(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint32_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (component_[s] != std::numeric_limits<std::uint32_t>::max()) continue;
    const auto label = static_cast<std::uint32_t>(component_count_++);
    component_[s] = label;
    stack.push_back(static_cast<std::uint32_t>(s));
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto w : neighbours(v)) {
        if (component_[w] == std::numeric_limits<std::uint32_t>::max()) {
          component_[w] = label;
          stack.push_back(w);
        }
      }
    }
  }
}

std::span<const std::uint32_t> GeodesicGraph::neighbours(std::size_t vertex) const {
  return {targets_.data() + offsets_[vertex], offsets_[vertex + 1] - offsets_[vertex]};
}

std::span<const double> GeodesicGraph::weights(std::size_t vertex) const {
  return {weights_.data() + offsets_[vertex], offsets_[vertex + 1] - offsets_[vertex]};
}

std::vector<double> GeodesicGraph::distances_from(std::size_t source, std::span<const std::size_t> targets) const {
  const std::size_t n = vertex_count();
  std::vector<double> dist(n, kInf);
  std::vector<unsigned char> settled(n, 0);
  std::vector<unsigned char> wanted(n, 0);
  std::size_t remaining = 0;
  for (auto t : targets) {
    if (!wanted[t] && component_[t] == component_[source]) {
      wanted[t] = 1;
      ++remaining;
    }
  }
  MinQueue queue;
  dist[source] = 0.0;
  queue.emplace(0.0, static_cast<std::uint32_t>(source));
  while (!queue.empty() && remaining > 0) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (settled[v]) continue;
    settled[v] = 1;
    if (wanted[v]) --remaining;
    const auto nb = neighbours(v);
    const auto wt = weights(v);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const double nd = d + wt[k];
      if (nd < dist[nb[k]]) {
        dist[nb[k]] = nd;
        queue.emplace(nd, nb[k]);
      }
    }
  }
  std::vector<double> out;
  out.reserve(targets.size());
  for (auto t : targets) out.push_back(settled[t] ? dist[t] : kInf);
  return out;
}

std::vector<std::size_t> GeodesicGraph::shortest_path(std::size_t source, std::size_t target, double* length) const {
  if (component_[source] != component_[target]) return {};
  const std::size_t n = vertex_count();
  std::vector<double> dist(n, kInf);
  std::vector<std::uint32_t> pred(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<unsigned char> settled(n, 0);
  MinQueue queue;
  dist[source] = 0.0;
  queue.emplace(0.0, static_cast<std::uint32_t>(source));
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (settled[v]) continue;
    settled[v] = 1;
    if (v == target) break;
    const auto nb = neighbours(v);
    const auto wt = weights(v);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const double nd = d + wt[k];
      // Equal-length alternatives keep the smaller predecessor index.
      if (nd < dist[nb[k]] || (nd == dist[nb[k]] && v < pred[nb[k]])) {
        dist[nb[k]] = nd;
        pred[nb[k]] = v;
        queue.emplace(nd, nb[k]);
      }
    }
  }
  std::vector<std::size_t> path;
  for (auto v = static_cast<std::uint32_t>(target);; v = pred[v]) {
    path.push_back(v);
    if (v == source) break;
  }
  std::reverse(path.begin(), path.end());
  if (length) *length = dist[target];
  return path;
}

// ---------------------------------------------------------------------------
// Inner distance
// ---------------------------------------------------------------------------

PathEstimate inner_distance(const GeodesicGraph& graph, const Vec& x, const Vec& y) {
  const auto& index = graph.index();
  const double tol = 2.0 * index.resolution() + 1e-12 * index.scale();
  const auto i = graph.snap(x);
  const auto j = graph.snap(y);
  const auto check = [&](const Vec& pt, std::size_t k) {
    const double d = (index.point(k) - pt).norm();
    if (d > tol) {
      throw Error(Errc::not_on_shape, "endpoint is " + std::to_string(d) + " from the cloud (tolerance " +
                                          std::to_string(tol) + ")");
    }
  };
  check(x, i);
  check(y, j);
  if (graph.component(i) != graph.component(j)) {
    throw Error(Errc::no_path, "endpoints lie in different graph components");
  }
  PathEstimate out;
  out.kind = PathKind::graph_geodesic;
  out.endpoints = {x, y};
  for (auto v : graph.shortest_path(i, j)) out.vertices.push_back(index.point(v));
  out.length = polyline_length(out.vertices);
  return out;
}

std::vector<PathEstimate> inner_distances(const GeodesicGraph& graph, std::span<const std::pair<Vec, Vec>> pairs) {
  std::vector<PathEstimate> out(pairs.size());
  std::vector<std::string> errors(pairs.size());
  std::vector<int> codes(pairs.size(), -1);
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    try {
      out[uk] = inner_distance(graph, pairs[uk].first, pairs[uk].second);
    } catch (const Error& e) {
      codes[uk] = static_cast<int>(e.code());
      errors[uk] = e.what();
    }
  }
  // Rethrow the first failure in pair order.
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (codes[k] >= 0) throw Error(static_cast<Errc>(codes[k]), errors[k]);
  }
  return out;
}

std::vector<PathEstimate> inner_distances_serial(const GeodesicGraph& graph,
                                                 std::span<const std::pair<Vec, Vec>> pairs) {
  std::vector<PathEstimate> out;
  out.reserve(pairs.size());
  for (const auto& [x, y] : pairs) out.push_back(inner_distance(graph, x, y));
  return out;
}

// ---------------------------------------------------------------------------
// Projection paths
// ---------------------------------------------------------------------------

PathEstimate project_segment(const ClosestPointOracle& oracle, const Vec& x, const Vec& y, int steps,
                             const Thresholds& thr) {
  if (steps < 1) throw Error(Errc::invalid_params, "project_segment needs at least one step");
  PathEstimate out;
  out.kind = PathKind::projection_path;
  out.endpoints = {x, y};
  out.steps = steps;
  const bool degenerate = (x - y).norm() == 0.0;
  const int count = degenerate ? 0 : steps;
  std::vector<Vec> images(static_cast<std::size_t>(count) + 1);
  std::vector<unsigned char> medial(images.size(), 0);
#pragma omp parallel for schedule(static)
  for (int k = 0; k <= count; ++k) {
    const double t = count == 0 ? 0.0 : static_cast<double>(k) / count;
    const Vec a = (1.0 - t) * x + t * y;
    const auto ns = oracle.near_set(a, thr.epsilon);
    const auto uk = static_cast<std::size_t>(k);
    medial[uk] = ns.distance > 1e-12 * oracle.scale() && assess_near_set(ns, a, thr).flag;
    images[uk] = representative(ns);
  }
  for (std::size_t k = 0; k < images.size(); ++k) {
    if (!medial[k]) continue;
    const double t = count == 0 ? 0.0 : static_cast<double>(k) / count;
    const Vec a = (1.0 - t) * x + t * y;
    std::string where;
    for (Eigen::Index i = 0; i < a.size(); ++i) where += (i ? ", " : "") + std::to_string(a[i]);
    throw Error(Errc::medial_crossing, "segment sample " + std::to_string(k) + " at (" + where + ") is medial");
  }
  out.vertices = std::move(images);
  out.length = polyline_length(out.vertices);
  return out;
}

PathEstimate project_segment_adaptive(const ClosestPointOracle& oracle, const Vec& x, const Vec& y,
                                      const Thresholds& thr, int steps, double rel_tol, int max_steps) {
  auto path = project_segment(oracle, x, y, steps, thr);
  while (path.length > 0.0 && 2 * path.steps <= max_steps) {
    auto finer = project_segment(oracle, x, y, 2 * path.steps, thr);
    const double change = std::abs(finer.length - path.length) / path.length;
    path = std::move(finer);
    if (change < rel_tol) break;
  }
  return path;
}

void write_path_csv(std::ostream& out, const PathEstimate& path) {
  const auto dim = path.vertices.empty() ? 0 : path.vertices.front().size();
  for (Eigen::Index k = 0; k < dim; ++k) out << (k ? "," : "") << 'x' << k;
  out << '\n';
  out.precision(12);
  for (const auto& v : path.vertices) {
    for (Eigen::Index k = 0; k < v.size(); ++k) out << (k ? "," : "") << v[k];
    out << '\n';
  }
}

}  // namespace medlab
