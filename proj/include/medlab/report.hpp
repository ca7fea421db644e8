#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "medlab/innermetric.hpp"
#include "medlab/medial.hpp"
#include "medlab/probes.hpp"

namespace medlab {

using Json = nlohmann::ordered_json;

/// Finite numbers as-is, non-finite as null.
Json num(double x);
Json to_json(const Vec& v);
Json to_json(const std::vector<Vec>& points);
Vec vec_from_json(const Json& j);

Json to_json(const Thresholds& thr);
Json to_json(const GridSpec& grid);
Json to_json(const MedialSample& s);
/// Grid, thresholds, samples and summary; per-node data lives in the CSV.
Json to_json(const MedialScanReport& r);
Json to_json(const PathEstimate& p);
Json to_json(const ProbeRegion& r);
Json to_json(const RegionCertificate& c);
Json to_json(const LipschitzReport& r);
Json to_json(const OnSetReport& r);
Json to_json(const LocalLneSample& s);
Json to_json(const LneReport& r);
Json to_json(const BallScan& b);
Json to_json(const TheoremVerdict& v);
Json to_json(const ConjectureTrace& t);

/// Two plotted axes plus, for n > 2, a slab |x[normal] - value| <= thickness.
struct SliceSpec {
  int axis_u = 0;
  int axis_v = 1;
  std::optional<int> normal;
  double value = 0.0;
  double thickness = 0.0;

  bool keeps(const Vec& x) const;
  static SliceSpec for_dim(std::size_t dim);
};

struct PlotPolyline {
  std::vector<Vec> vertices;
  std::string label;
};

struct PlotPoint {
  Vec location;
  double value = 0.0;
};

/// Layers for a standalone SVG slice plot.
struct PlotData {
  std::string title;
  std::vector<Vec> samples;         // gray
  std::vector<PlotPoint> medial;    // colored by value
  std::vector<PlotPolyline> paths;  // polylines
  std::vector<Vec> markers;         // probe points
};

/// Writes the plot; returns a warning when the slice keeps no data.
std::optional<std::string> emit_svg(std::ostream& out, const PlotData& data, const SliceSpec& slice);

}  // namespace medlab
