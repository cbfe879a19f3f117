#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfsensor/grid.hpp"
#include "pfsensor/placement.hpp"
#include "pfsensor/tracking.hpp"
#include "pfsensor/transfer_operator.hpp"
#include "pfsensor/uncertainty.hpp"

namespace pfsensor::app {

/// Input error in a config file or command line (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Box {
  Vec3 lo{};
  Vec3 hi{};
};

struct FieldEntry {
  std::filesystem::path path;
  double weight = 1.0;
  double sample_value = 0.0;
};

struct ScenarioSource {
  enum class Kind { kSynthetic, kFiles };
  Kind kind = Kind::kSynthetic;
  double diffusivity = 0.0;

  // synthetic
  std::string family = "recirculating";
  /// Vortex strength = strength_scale * xi.
  double strength_scale = 1.0;
  /// "gaussian <mu> <sigma>" or "kde <datafile>".
  std::string distribution;
  std::vector<double> cdf_points;

  // files
  std::vector<FieldEntry> fields;
};

struct ValidateSettings {
  double tolerance = 1e-2;
  /// Gaussian release blob; defaults to the domain center with width a tenth of the shortest side.
  std::optional<Vec3> release_center;
  std::optional<double> release_width;
  /// Markov steps compared; defaults to the run's `steps`.
  std::optional<std::size_t> steps;
  double cfl_target = 0.5;
};

/// Everything a run needs; loaded from a JSON file and overridable from the command line.
struct RunConfig {
  std::filesystem::path base_dir = ".";
  std::optional<StructuredGrid> grid;
  ScenarioSource scenarios;
  BoundarySpec boundary;
  double dt = 0.0;
  std::size_t steps = 0;
  double eps_acc = 0.0;
  bool raw_threshold = false;
  std::vector<Box> forbidden_boxes;
  std::vector<Box> sensing_ignore_boxes;
  std::vector<Box> occupied_boxes;
  std::optional<std::size_t> sensors;
  std::optional<double> min_coverage;
  RemovalMode removal = RemovalMode::kCovered;
  std::size_t workers = 1;
  std::filesystem::path out = "out";
  ValidateSettings validate;
  std::vector<std::size_t> converge_samples = {2, 3, 5, 7, 9};

  /// Resolves relative paths against the config file's directory.
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  /// Cross-field consistency; throws ConfigError.
  void check() const;
  const StructuredGrid& require_grid() const;
  SensorSpec sensor_spec() const;
  ConstraintSet constraints(const StructuredGrid& grid) const;
  /// True when a sensing restriction (ignore boxes or occupied zone) is configured.
  bool has_sensing_zone() const { return !sensing_ignore_boxes.empty() || !occupied_boxes.empty(); }
};

RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Parses "gaussian mu sigma" or "kde <datafile>" (one value per line, resolved against base_dir).
Distribution parse_distribution(const std::string& spec, const std::filesystem::path& base_dir);

/// cdf points used for an M-point study: the fixed nested sets for M in {2, 3, 5, 7, 9}, evenly
/// spaced points in [0, 1] otherwise.
std::vector<double> default_cdf_points(std::size_t m);

nlohmann::ordered_json grid_to_json(const StructuredGrid& g);
StructuredGrid grid_from_json(const nlohmann::json& j);

}  // namespace pfsensor::app
