#include "pipeline.hpp"

#include <cmath>
#include <fstream>

#include "pfsensor/parallel.hpp"
#include "pfsensor/text_io.hpp"
#include "pfsensor/uncertainty.hpp"

namespace pfsensor::app {

using nlohmann::ordered_json;

std::vector<double> ScenarioSet::weights() const {
  std::vector<double> w;
  for (const auto& s : scenarios) w.push_back(s.weight);
  return w;
}

std::vector<double> ScenarioSet::sample_values() const {
  std::vector<double> x;
  for (const auto& s : scenarios) x.push_back(s.sample_value);
  return x;
}

ScenarioSet make_synthetic_scenarios(const RunConfig& config, std::span<const double> cdf_points) {
  const StructuredGrid& grid = config.require_grid();
  const Distribution dist = parse_distribution(config.scenarios.distribution, config.base_dir);
  std::vector<double> samples;
  std::vector<double> weights;
  try {
    if (cdf_points.size() == 1) {
      samples = icdf_samples(dist, cdf_points);
      weights = {1.0};
    } else {
      const QuadratureRule rule = make_quadrature_rule(dist, cdf_points);
      samples = rule.samples;
      weights = rule.weights;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("cdf_points: ") + e.what());
  }
  ScenarioSet set{grid, {}, std::vector<double>(cdf_points.begin(), cdf_points.end())};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    set.scenarios.emplace_back(synth_recirculating(grid, config.scenarios.strength_scale * samples[i]),
                               config.scenarios.diffusivity, samples[i], weights[i]);
  }
  return set;
}

ScenarioSet make_scenarios(const RunConfig& config) {
  config.check();
  if (config.scenarios.kind == ScenarioSource::Kind::kSynthetic) {
    if (config.scenarios.cdf_points.empty()) throw ConfigError("synthetic scenarios need 'cdf_points'");
    return make_synthetic_scenarios(config, config.scenarios.cdf_points);
  }
  std::vector<FlowScenario> scenarios;
  for (const FieldEntry& f : config.scenarios.fields) {
    VelocityField field = load_field(config.resolve(f.path));
    if (config.grid && !(field.grid() == *config.grid)) {
      throw ConfigError(config.resolve(f.path).string() + ": field grid differs from the config grid");
    }
    if (!scenarios.empty() && !(field.grid() == scenarios.front().field.grid())) {
      throw ConfigError(config.resolve(f.path).string() + ": field grids differ between scenarios");
    }
    scenarios.emplace_back(std::move(field), config.scenarios.diffusivity, f.sample_value, f.weight);
  }
  ScenarioSet set{scenarios.front().field.grid(), std::move(scenarios), {}};
  return set;
}

std::vector<MarkovMatrix> build_operators(const RunConfig& config, const ScenarioSet& set) {
  std::vector<std::optional<MarkovMatrix>> slots(set.scenarios.size());
  parallel_for(set.scenarios.size(), config.workers,
               [&](std::size_t i) { slots[i].emplace(build_markov(set.scenarios[i], config.dt, config.boundary)); });
  std::vector<MarkovMatrix> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

ScaledTrackingMatrix scaled_tracking(const RunConfig& config, const StructuredGrid& grid, const MarkovMatrix& p) {
  const TrackingMatrix q = tracking_matrix(p, config.steps);
  const BinaryTrackingMatrix sensed = threshold(q, config.sensor_spec());
  const BinaryTrackingMatrix constrained = apply_constraints(sensed, config.constraints(grid));
  return volumetric_scale(constrained, grid);
}

PlacementRun run_placement(const RunConfig& config, const StructuredGrid& grid, std::span<const MarkovMatrix> operators,
                           std::span<const double> weights) {
  if (!config.sensors && !config.min_coverage) throw ConfigError("set 'sensors' or 'min_coverage'");
  const ConstraintSet constraints = config.constraints(grid);
  if (constraints.forbidden_locations.size() == grid.num_states()) {
    throw ConfigError("location constraints exclude every state; no sensor can be placed");
  }
  const std::size_t expected_states = config.boundary.has_outlet() ? grid.num_states() + 1 : grid.num_states();
  for (const auto& p : operators) {
    if (p.n_states() != expected_states) throw ConfigError("operator size does not match the grid");
  }

  std::vector<std::optional<ScaledTrackingMatrix>> slots(operators.size());
  parallel_for(operators.size(), config.workers,
               [&](std::size_t i) { slots[i].emplace(scaled_tracking(config, grid, operators[i])); });
  std::vector<ScaledTrackingMatrix> scaled;
  scaled.reserve(slots.size());
  for (auto& s : slots) scaled.push_back(std::move(*s));

  std::vector<CoverageVector> initial(scaled.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) initial[i] = coverage_vector(scaled[i]);

  PlacementRun run;
  run.initial_expected = expected_coverage(initial, weights);
  PlacementOptions options;
  options.max_sensors = config.sensors;
  options.min_coverage = config.min_coverage;
  options.removal = config.removal;
  options.workers = config.workers;
  run.plan = place_sensors(scaled, weights, options);
  if (config.has_sensing_zone()) {
    double occupied = 0.0;
    for (StateIndex k = 0; k < grid.num_states(); ++k) {
      if (!constraints.sensing_ignore.contains(k)) occupied += grid.cell_volume(k);
    }
    run.occupied_fraction = occupied / grid.total_volume();
  }
  return run;
}

namespace {

ordered_json boxes_json(const std::vector<Box>& boxes) {
  ordered_json out = ordered_json::array();
  for (const Box& b : boxes) {
    ordered_json j;
    j["lo"] = {b.lo[0], b.lo[1], b.lo[2]};
    j["hi"] = {b.hi[0], b.hi[1], b.hi[2]};
    out.push_back(j);
  }
  return out;
}

}  // namespace

ordered_json plan_report(const RunConfig& config, const StructuredGrid& grid, const PlacementRun& run,
                         std::span<const double> sample_values) {
  const SensorPlan& plan = run.plan;
  ordered_json report;
  report["format"] = "pfsensor-plan v1";
  ordered_json sensors = ordered_json::array();
  for (const PlacedSensor& s : plan.sensors) {
    const CellIndex c = grid.cell_index(s.state);
    const Vec3 x = grid.cell_center(s.state);
    ordered_json j;
    j["state"] = s.state;
    j["ijk"] = {c.i, c.j, c.l};
    j["position"] = {x[0], x[1], x[2]};
    j["expected_marginal"] = s.expected_marginal;
    j["per_scenario_marginal"] = s.per_scenario_marginal;
    j["cumulative_expected"] = s.cumulative_expected;
    sensors.push_back(j);
  }
  report["sensors"] = sensors;
  report["cumulative_expected_coverage"] = plan.cumulative_expected_coverage;
  if (run.occupied_fraction) {
    report["occupied_volume_fraction"] = *run.occupied_fraction;
    report["occupied_space_coverage"] =
        *run.occupied_fraction > 0.0 ? plan.cumulative_expected_coverage / *run.occupied_fraction : 0.0;
  }
  report["truncated"] = plan.truncated;
  report["stop_reason"] = to_string(plan.stop_reason);

  const ConstraintSet constraints = config.constraints(grid);
  ordered_json settings;
  if (config.sensors) settings["sensors"] = *config.sensors;
  else settings["sensors"] = nullptr;
  if (config.min_coverage) settings["min_coverage"] = *config.min_coverage;
  else settings["min_coverage"] = nullptr;
  settings["steps"] = config.steps;
  settings["dt"] = config.dt;
  settings["horizon"] = static_cast<double>(config.steps) * config.dt;
  settings["eps_acc"] = config.eps_acc;
  settings["threshold_mode"] = config.raw_threshold ? "raw" : "normalized";
  settings["removal"] = to_string(config.removal);
  settings["grid"] = grid_to_json(grid);
  settings["constraints"] = {
      {"forbidden", boxes_json(config.forbidden_boxes)},
      {"sensing_ignore", boxes_json(config.sensing_ignore_boxes)},
      {"occupied_zone", boxes_json(config.occupied_boxes)},
      {"forbidden_state_count", constraints.forbidden_locations.size()},
      {"ignored_state_count", constraints.sensing_ignore.size()},
  };
  settings["scenario_weights"] = plan.weights;
  settings["scenario_samples"] = std::vector<double>(sample_values.begin(), sample_values.end());
  report["settings"] = settings;
  return report;
}

void save_manifest(const std::filesystem::path& path, const Manifest& m) {
  ordered_json j;
  j["format"] = "pfsensor-manifest v1";
  j["dt"] = m.dt;
  j["grid"] = grid_to_json(m.grid);
  ordered_json list = ordered_json::array();
  for (const ManifestEntry& e : m.scenarios) {
    list.push_back({{"id", e.id}, {"xi", e.sample_value}, {"weight", e.weight}, {"path", e.path.generic_string()}});
  }
  j["scenarios"] = list;
  write_text(path, j.dump(2) + "\n");
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.value("format", "") != "pfsensor-manifest v1") throw ConfigError(path.string() + ": not a manifest");
    Manifest m{grid_from_json(j.at("grid")), j.at("dt").get<double>(), {}};
    double total = 0.0;
    for (const auto& e : j.at("scenarios")) {
      ManifestEntry entry{e.at("id").get<std::size_t>(), e.at("xi").get<double>(), e.at("weight").get<double>(),
                          e.at("path").get<std::string>()};
      total += entry.weight;
      m.scenarios.push_back(entry);
    }
    if (m.scenarios.empty()) throw ConfigError(path.string() + ": manifest lists no scenarios");
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError(path.string() + ": manifest weights do not sum to 1");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<MarkovMatrix> load_operators(const std::filesystem::path& manifest_path, const Manifest& m) {
  std::vector<MarkovMatrix> out;
  const auto dir = manifest_path.parent_path();
  for (const ManifestEntry& e : m.scenarios) {
    const auto p = e.path.is_absolute() ? e.path : dir / e.path;
    out.push_back(load_markov(p));
    if (out.back().dt() != m.dt) throw ParseError(p.string(), 0, "matrix dt differs from the manifest");
  }
  return out;
}

ConcentrationField gaussian_release(const StructuredGrid& grid, const Vec3& center, double width,
                                    std::size_t n_states) {
  std::vector<double> values(n_states, 0.0);
  double total = 0.0;
  for (StateIndex k = 0; k < grid.num_states(); ++k) {
    const Vec3 x = grid.cell_center(k);
    double r2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      if (grid.dims()[a] > 1) r2 += (x[a] - center[a]) * (x[a] - center[a]);
    }
    values[k] = std::exp(-0.5 * r2 / (width * width));
    total += values[k];
  }
  if (!(total > 0.0)) throw ConfigError("release blob does not overlap the grid");
  for (double& v : values) v /= total;
  return ConcentrationField(std::move(values));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace pfsensor::app
