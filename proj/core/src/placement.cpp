#include "pfsensor/placement.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pfsensor/parallel.hpp"

namespace pfsensor {

namespace {

// Slack for summed volume fractions when comparing against min_coverage.
constexpr double kCoverageTolerance = 1e-12;

// Residual coverage of one scenario: rows still uncovered, columns still open.
CoverageVector residual_coverage(const ScaledTrackingMatrix& q, const std::vector<char>& row_alive,
                                 const std::vector<char>& col_open) {
  CoverageVector v(q.n_states(), 0.0);
  for (StateIndex i = 0; i < q.n_states(); ++i) {
    if (!row_alive[i]) continue;
    const double value = q.row_value(i);
    for (auto j : q.row(i)) {
      if (col_open[j]) v[j] += value;
    }
  }
  return v;
}

void check_weights(std::span<const double> weights, std::size_t count) {
  if (weights.size() != count) throw std::invalid_argument("one weight per scenario required");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("scenario weight outside [0, 1]");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("scenario weights must sum to 1");
}

}  // namespace

CoverageVector coverage_vector(const ScaledTrackingMatrix& q) {
  std::vector<char> all(q.n_states(), 1);
  return residual_coverage(q, all, all);
}

CoverageVector expected_coverage(std::span<const CoverageVector> vectors, std::span<const double> weights) {
  if (vectors.empty()) throw std::invalid_argument("expected_coverage: no coverage vectors");
  check_weights(weights, vectors.size());
  CoverageVector out(vectors.front().size(), 0.0);
  for (std::size_t s = 0; s < vectors.size(); ++s) {
    if (vectors[s].size() != out.size()) throw std::invalid_argument("expected_coverage: vector length mismatch");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += weights[s] * vectors[s][j];
  }
  return out;
}

std::vector<double> SensorPlan::detection_probability(std::size_t s) const {
  const PlacedSensor& sensor = sensors.at(s);
  std::size_t n = 0;
  for (const auto& rows : sensor.credited_rows) {
    for (StateIndex i : rows) n = std::max(n, i + 1);
  }
  std::vector<double> prob(n, 0.0);
  for (std::size_t m = 0; m < sensor.credited_rows.size(); ++m) {
    for (StateIndex i : sensor.credited_rows[m]) prob[i] += weights[m];
  }
  return prob;
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::kSensorCount: return "sensor_count";
    case StopReason::kMinCoverage: return "min_coverage";
    case StopReason::kNoResidualCoverage: return "no_residual_coverage";
  }
  return "unknown";
}

std::string to_string(RemovalMode m) { return m == RemovalMode::kCovered ? "covered" : "literal"; }

SensorPlan place_sensors(std::span<const ScaledTrackingMatrix> scenarios, std::span<const double> weights,
                         const PlacementOptions& options) {
  if (scenarios.empty()) throw std::invalid_argument("place_sensors: no scenarios");
  check_weights(weights, scenarios.size());
  const bool has_count = options.max_sensors.has_value();
  const bool has_target = options.min_coverage.has_value();
  if (has_count && *options.max_sensors == 0) throw std::invalid_argument("sensor count must be at least 1");
  if (has_target && !(*options.min_coverage > 0.0 && *options.min_coverage <= 1.0)) {
    throw std::invalid_argument("min_coverage must lie in (0, 1]");
  }
  if (!has_count && !has_target) throw std::invalid_argument("either a sensor count or min_coverage is required");

  const std::size_t n = scenarios.front().n_states();
  for (const auto& q : scenarios) {
    if (q.n_states() != n) throw std::invalid_argument("scenario matrices differ in size");
  }
  const std::size_t n_scen = scenarios.size();

  SensorPlan plan;
  plan.weights.assign(weights.begin(), weights.end());
  plan.options = options;

  std::vector<std::vector<char>> row_alive(n_scen, std::vector<char>(n, 1));
  std::vector<char> col_open(n, 1);
  std::vector<CoverageVector> per_scenario(n_scen);

  while (true) {
    if (has_count && plan.sensors.size() >= *options.max_sensors) {
      plan.stop_reason = StopReason::kSensorCount;
      break;
    }
    parallel_for(n_scen, options.workers, [&](std::size_t s) {
      per_scenario[s] = residual_coverage(scenarios[s], row_alive[s], col_open);
    });
    const CoverageVector expected = expected_coverage(per_scenario, weights);

    StateIndex best = n;
    double best_value = 0.0;
    for (StateIndex j = 0; j < n; ++j) {
      if (col_open[j] && expected[j] > best_value) {
        best = j;
        best_value = expected[j];
      }
    }
    if (best == n) {
      plan.stop_reason = StopReason::kNoResidualCoverage;
      plan.truncated = true;
      break;
    }

    PlacedSensor sensor;
    sensor.state = best;
    sensor.expected_marginal = best_value;
    sensor.per_scenario_marginal.resize(n_scen);
    sensor.credited_rows.resize(n_scen);
    for (std::size_t s = 0; s < n_scen; ++s) {
      sensor.per_scenario_marginal[s] = per_scenario[s][best];
      const ScaledTrackingMatrix& q = scenarios[s];
      for (StateIndex i = 0; i < n; ++i) {
        if (row_alive[s][i] && q.pattern().contains(i, best)) sensor.credited_rows[s].push_back(i);
      }
      if (options.removal == RemovalMode::kCovered) {
        for (StateIndex i : sensor.credited_rows[s]) row_alive[s][i] = 0;
      } else {
        row_alive[s][best] = 0;
      }
    }
    col_open[best] = 0;
    plan.cumulative_expected_coverage += best_value;
    sensor.cumulative_expected = plan.cumulative_expected_coverage;
    plan.sensors.push_back(std::move(sensor));

    if (has_target && plan.cumulative_expected_coverage >= *options.min_coverage - kCoverageTolerance) {
      plan.stop_reason = StopReason::kMinCoverage;
      break;
    }
  }
  return plan;
}

}  // namespace pfsensor
