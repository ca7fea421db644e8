#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "medlab/report.hpp"

namespace medlab {

struct ScanParams {
  GridSpec grid;
  std::map<std::string, Vec> probes;
  std::vector<std::array<Vec, 2>> refine;  // segments handed to refine_jump
  double refine_tol = 1e-6;
  bool analytic = false;
  SliceSpec slice;
};

struct LneFieldParams {
  std::vector<Vec> points;
  std::size_t random_points = 0;
  std::vector<double> radii;
  std::size_t sources = 16;
  SliceSpec slice;
};

struct LipschitzParams {
  ProbeRegion region;
  CertifyOptions certify;
  std::size_t pairs = 10000;
  bool analytic = false;
  std::size_t on_set_pairs = 0;
  double on_set_max_offset = 0.0;
  SliceSpec slice;
};

struct TheoremParams {
  std::vector<Vec> points;
  std::size_t random_points = 0;
  TheoremConfig config;
  SliceSpec slice;
};

struct ConjectureParams {
  Vec point;
  std::vector<Vec> medial_points;
  double radius = 0.0;
  std::size_t count = 6;
  int resolution = 41;
  SliceSpec slice;
};

using ExperimentParams = std::variant<ScanParams, LneFieldParams, LipschitzParams, TheoremParams, ConjectureParams>;

struct ExperimentSpec {
  std::string name;
  std::string type;  // scan-medial | lne-field | lipschitz | verify-theorem | conjecture
  std::optional<std::uint64_t> seed;
  ExperimentParams params;
  Json source;  // descriptor as written in the config
};

struct ExperimentConfig {
  ShapeSpec shape;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  std::string output_dir = "medlab-out";
  double epsilon_factor = 2.0;
  double lambda_factor = 10.0;
  double connect_factor = 4.0;
  std::vector<ExperimentSpec> experiments;
};

/// Parses and validates a config document. Relative CSV paths resolve against
/// base_dir. Errors are Errc::invalid_config naming the offending field.
ExperimentConfig parse_config(const Json& doc, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

struct RunOptions {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed_override;
  std::ostream* log = nullptr;
  std::string config_path;
};

struct ExperimentOutcome {
  std::string name;
  std::string type;
  bool passed = false;
  std::string error;
};

struct RunResult {
  std::vector<ExperimentOutcome> experiments;
  std::string output_dir;

  bool passed() const;
  bool errored() const;
  /// 0 when every check passed, 1 on a failed check, 3 on a module error.
  int exit_code() const;
};

RunResult run_experiments(const ExperimentConfig& config, const RunOptions& options);

/// Integer value of MEDLAB_SEED_OVERRIDE, if set.
std::optional<std::uint64_t> seed_override_from_env();

}  // namespace medlab
