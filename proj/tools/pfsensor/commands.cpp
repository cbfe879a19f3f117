#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "config.hpp"
#include "pfsensor/oracle.hpp"
#include "pfsensor/parallel.hpp"
#include "pfsensor/text_io.hpp"
#include "pipeline.hpp"

namespace pfsensor::app {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Overrides {
  std::string config;
  std::optional<double> dt;
  std::optional<std::size_t> steps;
  std::optional<double> eps_acc;
  bool raw_threshold = false;
  std::optional<std::string> removal;
  std::optional<std::size_t> sensors;
  std::optional<double> min_coverage;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Run configuration (JSON)")->required();
  cmd->add_option("--dt", o.dt, "Markov time step in seconds");
  cmd->add_option("--steps", o.steps, "Horizon in Markov steps (m)");
  cmd->add_option("--eps-acc", o.eps_acc, "Sensor detection threshold in [0, 1]");
  cmd->add_flag("--raw-threshold", o.raw_threshold, "Compare tracking entries to eps_acc without (m + 1) scaling");
  cmd->add_option("--removal", o.removal, "Coverage removal after each sensor")
      ->check(CLI::IsMember({"covered", "literal"}));
  cmd->add_option("--sensors", o.sensors, "Number of sensors to place");
  cmd->add_option("--min-coverage", o.min_coverage, "Stop once expected coverage reaches this fraction");
  cmd->add_option("--workers", o.workers, "Worker threads for scenario-level work (0 = all cores)");
  cmd->add_option("--out", o.out, "Output directory");
}

RunConfig resolve_config(const Overrides& o) {
  RunConfig c = load_config(o.config);
  if (o.dt) c.dt = *o.dt;
  if (o.steps) c.steps = *o.steps;
  if (o.eps_acc) c.eps_acc = *o.eps_acc;
  if (o.raw_threshold) c.raw_threshold = true;
  if (o.removal) c.removal = *o.removal == "literal" ? RemovalMode::kLiteral : RemovalMode::kCovered;
  if (o.sensors) c.sensors = *o.sensors;
  if (o.min_coverage) c.min_coverage = *o.min_coverage;
  if (o.workers) c.workers = *o.workers;
  if (o.out) c.out = *o.out;
  c.check();
  return c;
}

fs::path prepare_out(const RunConfig& c) {
  fs::create_directories(c.out);
  return c.out;
}

std::string matrix_name(std::size_t id) {
  std::ostringstream s;
  s << "markov_" << std::setw(3) << std::setfill('0') << id << ".txt";
  return s.str();
}

int cmd_build(const RunConfig& c, std::ostream& out) {
  const ScenarioSet set = make_scenarios(c);
  const std::vector<MarkovMatrix> ops = build_operators(c, set);
  const fs::path dir = prepare_out(c);
  Manifest manifest{set.grid, c.dt, {}};
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const std::string name = matrix_name(i);
    save_markov(dir / name, ops[i]);
    manifest.scenarios.push_back({i, set.scenarios[i].sample_value, set.scenarios[i].weight, name});
  }
  save_manifest(dir / "manifest.json", manifest);
  out << "built " << ops.size() << " operator(s), " << ops.front().n_states() << " states, dt "
      << format_double(c.dt) << " s -> " << (dir / "manifest.json").string() << '\n';
  return kExitOk;
}

int cmd_place(const RunConfig& c, const std::optional<std::string>& manifest_arg, std::ostream& out) {
  const fs::path manifest_path = manifest_arg ? fs::path(*manifest_arg) : c.out / "manifest.json";
  const Manifest manifest = load_manifest(manifest_path);
  if (c.grid && !(*c.grid == manifest.grid)) throw ConfigError("manifest grid differs from the config grid");
  const std::vector<MarkovMatrix> ops = load_operators(manifest_path, manifest);
  std::vector<double> weights, samples;
  for (const auto& e : manifest.scenarios) {
    weights.push_back(e.weight);
    samples.push_back(e.sample_value);
  }
  RunConfig effective = c;
  effective.dt = manifest.dt;
  const PlacementRun run = run_placement(effective, manifest.grid, ops, weights);
  const fs::path dir = prepare_out(c);
  write_text(dir / "plan.json", plan_report(effective, manifest.grid, run, samples).dump(2) + "\n");

  std::vector<double> initial(run.initial_expected.begin(),
                              run.initial_expected.begin() + static_cast<long>(manifest.grid.num_states()));
  save_scalar_field(dir / "expected_coverage.scalar", manifest.grid, initial);
  for (std::size_t s = 0; s < run.plan.sensors.size(); ++s) {
    std::vector<double> map = run.plan.detection_probability(s);
    map.resize(manifest.grid.num_states(), 0.0);
    std::ostringstream name;
    name << "sensor_" << std::setw(2) << std::setfill('0') << s << "_coverage.scalar";
    save_scalar_field(dir / name.str(), manifest.grid, map);
  }

  out << "placed " << run.plan.sensors.size() << " sensor(s); expected coverage "
      << format_double(run.plan.cumulative_expected_coverage);
  if (run.plan.truncated) out << " (truncated: no residual coverage)";
  out << '\n';
  for (const PlacedSensor& s : run.plan.sensors) {
    out << "  state " << s.state << "  marginal " << format_double(s.expected_marginal) << '\n';
  }
  return kExitOk;
}

int cmd_validate(const RunConfig& c, const std::optional<std::string>& manifest_arg, std::ostream& out) {
  const ScenarioSet set = make_scenarios(c);
  std::vector<MarkovMatrix> ops;
  if (manifest_arg) {
    const Manifest manifest = load_manifest(*manifest_arg);
    ops = load_operators(*manifest_arg, manifest);
    if (ops.size() != set.scenarios.size()) throw ConfigError("manifest and config list different scenario counts");
  } else {
    ops = build_operators(c, set);
  }

  const StructuredGrid& grid = set.grid;
  const Vec3 len = grid.lengths();
  Vec3 center = c.validate.release_center.value_or(
      Vec3{grid.origin()[0] + 0.5 * len[0], grid.origin()[1] + 0.5 * len[1], grid.origin()[2] + 0.5 * len[2]});
  double shortest = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (grid.dims()[a] > 1) shortest = std::min(shortest, len[a]);
  }
  if (!std::isfinite(shortest)) shortest = len[0];
  const double width = c.validate.release_width.value_or(0.1 * shortest);
  const std::size_t steps = c.validate.steps.value_or(c.steps);
  if (steps == 0) throw ConfigError("validation needs a positive number of steps");

  const ConcentrationField phi0 = gaussian_release(grid, center, width, ops.front().n_states());
  OracleConfig oracle;
  oracle.cfl_target = c.validate.cfl_target;

  std::vector<std::optional<TransportComparison>> results(ops.size());
  parallel_for(ops.size(), c.workers, [&](std::size_t i) {
    results[i].emplace(compare_transport(set.scenarios[i], ops[i], phi0, steps, oracle, c.boundary));
  });

  const fs::path dir = prepare_out(c);
  ordered_json report;
  report["format"] = "pfsensor-validation v1";
  report["tolerance"] = c.validate.tolerance;
  report["steps"] = steps;
  report["horizon"] = static_cast<double>(steps) * ops.front().dt();
  ordered_json rows = ordered_json::array();
  bool ok = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const TransportComparison& r = *results[i];
    const bool pass = r.l2_relative_error <= c.validate.tolerance;
    ok = ok && pass;
    rows.push_back({{"id", i},
                    {"xi", set.scenarios[i].sample_value},
                    {"l2_relative_error", r.l2_relative_error},
                    {"pass", pass}});
    std::vector<double> markov(r.markov.values().begin(), r.markov.values().begin() + static_cast<long>(grid.num_states()));
    std::vector<double> pde(r.pde.values().begin(), r.pde.values().begin() + static_cast<long>(grid.num_states()));
    save_scalar_field(dir / ("validate_markov_" + std::to_string(i) + ".scalar"), grid, markov);
    save_scalar_field(dir / ("validate_pde_" + std::to_string(i) + ".scalar"), grid, pde);
    out << "scenario " << i << "  L2 relative error " << format_double(r.l2_relative_error)
        << (pass ? "  ok" : "  FAIL") << '\n';
  }
  report["scenarios"] = rows;
  report["pass"] = ok;
  write_text(dir / "validation.json", report.dump(2) + "\n");
  return ok ? kExitOk : kExitValidationFailure;
}

double l2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

int cmd_converge(const RunConfig& c, std::vector<std::size_t> counts, std::ostream& out) {
  if (c.scenarios.kind != ScenarioSource::Kind::kSynthetic) {
    throw ConfigError("converge needs a synthetic scenario family with a distribution");
  }
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  if (counts.size() < 2) throw ConfigError("converge needs at least two distinct sample counts");
  const StructuredGrid& grid = c.require_grid();

  // Coverage vectors are cached per sample value; nested cdf sets reuse most of them.
  std::map<double, CoverageVector> cache;
  std::vector<CoverageVector> expected(counts.size());
  std::vector<std::vector<double>> cdf_sets(counts.size());
  for (std::size_t r = 0; r < counts.size(); ++r) {
    cdf_sets[r] = default_cdf_points(counts[r]);
    const ScenarioSet set = make_synthetic_scenarios(c, cdf_sets[r]);
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < set.scenarios.size(); ++i) {
      if (!cache.contains(set.scenarios[i].sample_value)) missing.push_back(i);
    }
    std::vector<CoverageVector> fresh(missing.size());
    parallel_for(missing.size(), c.workers, [&](std::size_t t) {
      const MarkovMatrix p = build_markov(set.scenarios[missing[t]], c.dt, c.boundary);
      fresh[t] = coverage_vector(scaled_tracking(c, grid, p));
    });
    for (std::size_t t = 0; t < missing.size(); ++t) cache[set.scenarios[missing[t]].sample_value] = fresh[t];

    std::vector<CoverageVector> vectors;
    for (const auto& s : set.scenarios) vectors.push_back(cache.at(s.sample_value));
    expected[r] = expected_coverage(vectors, set.weights());
  }

  const CoverageVector& ref = expected.back();
  const double ref_norm = l2(ref);
  ordered_json rows = ordered_json::array();
  out << "samples  cdf points                                  relative error\n";
  for (std::size_t r = 0; r < counts.size(); ++r) {
    std::ostringstream pts;
    for (std::size_t i = 0; i < cdf_sets[r].size(); ++i) pts << (i ? "," : "") << format_double(cdf_sets[r][i]);
    ordered_json row;
    row["samples"] = counts[r];
    row["cdf_points"] = cdf_sets[r];
    out << std::left << std::setw(9) << counts[r] << std::setw(44) << pts.str();
    if (r + 1 < counts.size()) {
      std::vector<double> diff(ref.size());
      for (std::size_t k = 0; k < ref.size(); ++k) diff[k] = expected[r][k] - ref[k];
      const double err = ref_norm > 0.0 ? l2(diff) / ref_norm : l2(diff);
      row["relative_error"] = err;
      out << format_double(err) << '\n';
    } else {
      row["relative_error"] = nullptr;
      out << "- (reference)\n";
    }
    rows.push_back(row);
  }
  const fs::path dir = prepare_out(c);
  ordered_json report;
  report["format"] = "pfsensor-convergence v1";
  report["reference_samples"] = counts.back();
  report["rows"] = rows;
  write_text(dir / "convergence.json", report.dump(2) + "\n");
  return kExitOk;
}

int cmd_propagate(const RunConfig& c, std::size_t scenario, std::optional<std::size_t> release_state,
                  double source_rate, std::ostream& out) {
  const ScenarioSet set = make_scenarios(c);
  if (scenario >= set.scenarios.size()) throw ConfigError("scenario index out of range");
  if (c.steps == 0) throw ConfigError("propagate needs a positive number of steps");
  const MarkovMatrix p = build_markov(set.scenarios[scenario], c.dt, c.boundary);
  const StructuredGrid& grid = set.grid;
  StateIndex origin_state = release_state.value_or(
      grid.state_index({grid.nx() / 2, grid.ny() / 2, grid.nz() / 2}));
  if (origin_state >= grid.num_states()) throw ConfigError("release state outside the grid");

  std::vector<double> phi(p.n_states(), 0.0);
  std::vector<double> src(p.n_states(), 0.0);
  if (source_rate > 0.0) src[origin_state] = source_rate;
  else phi[origin_state] = 1.0;
  const ConcentrationField result = propagate(ConcentrationField(phi), p, SourceTerm(src), c.steps);

  const fs::path dir = prepare_out(c);
  std::vector<double> values(result.values().begin(), result.values().begin() + static_cast<long>(grid.num_states()));
  const fs::path file = dir / ("propagate_" + std::to_string(scenario) + ".scalar");
  save_scalar_field(file, grid, values);
  out << "propagated " << c.steps << " step(s) from state " << origin_state << "; total amount "
      << format_double(result.total()) << " -> " << file.string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sensor placement from flux-built transfer operators"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Overrides build_o, place_o, validate_o, converge_o, propagate_o;
  std::optional<std::string> place_manifest, validate_manifest;
  std::string samples_arg;
  std::size_t scenario = 0;
  std::optional<std::size_t> release_state;
  double source_rate = 0.0;

  auto* build = app.add_subcommand("build", "Build one Markov matrix per flow scenario");
  add_common(build, build_o);
  auto* place = app.add_subcommand("place", "Greedy expected-coverage sensor placement");
  add_common(place, place_o);
  place->add_option("--manifest", place_manifest, "Manifest written by build (default <out>/manifest.json)");
  auto* validate = app.add_subcommand("validate", "Compare Markov transport with the finite-volume solver");
  add_common(validate, validate_o);
  validate->add_option("--manifest", validate_manifest, "Validate prebuilt matrices instead of rebuilding");
  auto* converge = app.add_subcommand("converge", "Expected-coverage convergence in the number of samples");
  add_common(converge, converge_o);
  converge->add_option("--samples", samples_arg, "Comma-separated sample counts, e.g. 2,3,5,7,9");
  auto* prop = app.add_subcommand("propagate", "Transport a release through one scenario's operator");
  add_common(prop, propagate_o);
  prop->add_option("--scenario", scenario, "Scenario index");
  prop->add_option("--release-state", release_state, "Release state index (default: domain center)");
  prop->add_option("--source-rate", source_rate, "Continuous release per step instead of a unit pulse");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (build->parsed()) return cmd_build(resolve_config(build_o), out);
    if (place->parsed()) return cmd_place(resolve_config(place_o), place_manifest, out);
    if (validate->parsed()) return cmd_validate(resolve_config(validate_o), validate_manifest, out);
    if (converge->parsed()) {
      RunConfig c = resolve_config(converge_o);
      std::vector<std::size_t> counts = c.converge_samples;
      if (!samples_arg.empty()) {
        counts.clear();
        std::stringstream ss(samples_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          std::size_t v = 0;
          auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
          if (ec != std::errc() || ptr != tok.data() + tok.size() || v == 0) {
            throw ConfigError("invalid sample count '" + tok + "'");
          }
          counts.push_back(v);
        }
      }
      return cmd_converge(c, counts, out);
    }
    if (prop->parsed()) return cmd_propagate(resolve_config(propagate_o), scenario, release_state, source_rate, out);
  } catch (const StabilityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace pfsensor::app
