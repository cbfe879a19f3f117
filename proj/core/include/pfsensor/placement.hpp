#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfsensor/tracking.hpp"

namespace pfsensor {

/// Per-state coverage, as a fraction of the total domain volume.
using CoverageVector = std::vector<double>;

/// v(j) = sum_i Q**(i, j): volume fraction whose releases are sensed by a sensor at state j.
CoverageVector coverage_vector(const ScaledTrackingMatrix& q);

/// E[V](j) = sum_s theta_s v_s(j). Throws std::invalid_argument on size mismatches.
CoverageVector expected_coverage(std::span<const CoverageVector> vectors, std::span<const double> weights);

/// What is removed from every scenario matrix after a sensor is placed at state k.
enum class RemovalMode {
  /// Column k and every row with a pair in column k (all releases the sensor already covers).
  kCovered,
  /// Only row k and column k.
  kLiteral,
};

struct PlacementOptions {
  /// Upper bound on the number of sensors; unlimited when unset.
  std::optional<std::size_t> max_sensors;
  /// Stop once cumulative expected coverage reaches this fraction.
  std::optional<double> min_coverage;
  RemovalMode removal = RemovalMode::kCovered;
  /// Threads used for per-scenario coverage vectors; 0 picks the hardware count.
  std::size_t workers = 1;
};

struct PlacedSensor {
  StateIndex state = 0;
  double expected_marginal = 0.0;
  std::vector<double> per_scenario_marginal;
  /// Release rows credited to this sensor, per scenario.
  std::vector<std::vector<StateIndex>> credited_rows;
  /// Cumulative expected coverage after this sensor.
  double cumulative_expected = 0.0;
};

enum class StopReason { kSensorCount, kMinCoverage, kNoResidualCoverage };

struct SensorPlan {
  std::vector<PlacedSensor> sensors;
  double cumulative_expected_coverage = 0.0;
  /// Fewer sensors than requested because coverage ran out.
  bool truncated = false;
  StopReason stop_reason = StopReason::kSensorCount;
  std::vector<double> weights;
  PlacementOptions options;

  /// Probability, per release state, that the release is detected by sensor `s`.
  std::vector<double> detection_probability(std::size_t s) const;
};

std::string to_string(StopReason r);
std::string to_string(RemovalMode m);

/// Greedy expected-coverage placement: each round places the sensor at the argmax of the
/// expected coverage vector (lowest index on ties), records its marginals and removes what it
/// covers from every scenario matrix. Stops after max_sensors, at min_coverage, or when no
/// residual coverage is left. Requires max_sensors >= 1 or min_coverage in (0, 1].
SensorPlan place_sensors(std::span<const ScaledTrackingMatrix> scenarios, std::span<const double> weights,
                         const PlacementOptions& options);

}  // namespace pfsensor
