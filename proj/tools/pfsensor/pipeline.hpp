#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "pfsensor/flowfield.hpp"
#include "pfsensor/placement.hpp"
#include "pfsensor/tracking.hpp"
#include "pfsensor/transfer_operator.hpp"

namespace pfsensor::app {

/// Flow realizations with their sample values and probability weights, in scenario order.
struct ScenarioSet {
  StructuredGrid grid;
  std::vector<FlowScenario> scenarios;
  std::vector<double> cdf_points;  // empty for file-based scenarios

  std::vector<double> weights() const;
  std::vector<double> sample_values() const;
};

ScenarioSet make_scenarios(const RunConfig& config);
/// Synthetic scenarios for an explicit cdf point set (convergence studies).
ScenarioSet make_synthetic_scenarios(const RunConfig& config, std::span<const double> cdf_points);

std::vector<MarkovMatrix> build_operators(const RunConfig& config, const ScenarioSet& set);

/// Tracking, threshold, constraints and volume scaling for one operator.
ScaledTrackingMatrix scaled_tracking(const RunConfig& config, const StructuredGrid& grid, const MarkovMatrix& p);

struct PlacementRun {
  SensorPlan plan;
  /// Expected coverage vector before any sensor is placed.
  CoverageVector initial_expected;
  /// Occupied volume over total volume when a sensing zone is configured.
  std::optional<double> occupied_fraction;
};

PlacementRun run_placement(const RunConfig& config, const StructuredGrid& grid, std::span<const MarkovMatrix> operators,
                           std::span<const double> weights);

/// Plan report with fixed key order; numbers serialize to their shortest round-trip form.
nlohmann::ordered_json plan_report(const RunConfig& config, const StructuredGrid& grid, const PlacementRun& run,
                                   std::span<const double> sample_values);

struct ManifestEntry {
  std::size_t id = 0;
  double sample_value = 0.0;
  double weight = 1.0;
  std::filesystem::path path;  // relative to the manifest's directory
};

struct Manifest {
  StructuredGrid grid;
  double dt = 0.0;
  std::vector<ManifestEntry> scenarios;
};

void save_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest load_manifest(const std::filesystem::path& path);
/// Loads every matrix listed in a manifest (ParseError on malformed or non-stochastic files).
std::vector<MarkovMatrix> load_operators(const std::filesystem::path& manifest_path, const Manifest& m);

/// Smooth Gaussian release of unit total amount centered at `center`.
ConcentrationField gaussian_release(const StructuredGrid& grid, const Vec3& center, double width,
                                    std::size_t n_states);

/// Writes text to a file, throwing std::runtime_error on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace pfsensor::app
