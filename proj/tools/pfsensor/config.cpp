#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pfsensor/text_io.hpp"

namespace pfsensor::app {

namespace {

using nlohmann::json;

Vec3 vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + " must be an array of 3 numbers");
  Vec3 v{};
  for (int a = 0; a < 3; ++a) {
    if (!j[a].is_number()) throw ConfigError(std::string(what) + " must be an array of 3 numbers");
    v[a] = j[a].get<double>();
  }
  return v;
}

std::vector<Box> boxes(const json& j, const char* what) {
  std::vector<Box> out;
  const json list = j.is_array() ? j : json::array({j});
  for (const auto& b : list) {
    if (!b.is_object() || !b.contains("lo") || !b.contains("hi")) {
      throw ConfigError(std::string(what) + " boxes need 'lo' and 'hi'");
    }
    Box box{vec3(b["lo"], "box lo"), vec3(b["hi"], "box hi")};
    for (int a = 0; a < 3; ++a) {
      if (box.lo[a] > box.hi[a]) throw ConfigError(std::string(what) + " box has lo > hi");
    }
    out.push_back(box);
  }
  return out;
}

template <class T>
T number(const json& j, const char* key) {
  if (!j.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  if constexpr (std::is_unsigned_v<T>) {
    if (!j.is_number_unsigned()) throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  }
  return j.get<T>();
}

BoundaryKind boundary_kind(const std::string& s) {
  if (s == "closed") return BoundaryKind::kClosed;
  if (s == "outlet") return BoundaryKind::kOutlet;
  throw ConfigError("boundary kind must be 'closed' or 'outlet', got '" + s + "'");
}

ZoneMask union_of(const StructuredGrid& grid, const std::vector<Box>& list) {
  ZoneMask mask(grid);
  for (const Box& b : list) mask = mask.united(box_mask(grid, b.lo, b.hi));
  return mask;
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

const StructuredGrid& RunConfig::require_grid() const {
  if (!grid) throw ConfigError("config has no 'grid' section");
  return *grid;
}

SensorSpec RunConfig::sensor_spec() const {
  return SensorSpec(eps_acc, raw_threshold ? ThresholdMode::kRaw : ThresholdMode::kNormalized);
}

ConstraintSet RunConfig::constraints(const StructuredGrid& g) const {
  ConstraintSet c{union_of(g, forbidden_boxes), union_of(g, sensing_ignore_boxes)};
  if (!occupied_boxes.empty()) c.sensing_ignore = c.sensing_ignore.united(union_of(g, occupied_boxes).complement());
  return c;
}

void RunConfig::check() const {
  if (!(dt > 0.0)) throw ConfigError("'dt' must be positive");
  if (!(eps_acc >= 0.0 && eps_acc <= 1.0)) throw ConfigError("'eps_acc' must lie in [0, 1]");
  if (sensors && *sensors == 0) throw ConfigError("'sensors' must be at least 1");
  if (min_coverage && !(*min_coverage > 0.0 && *min_coverage <= 1.0)) {
    throw ConfigError("'min_coverage' must lie in (0, 1]");
  }
  if (!(scenarios.diffusivity >= 0.0)) throw ConfigError("'diffusivity' must be non-negative");
  if (scenarios.kind == ScenarioSource::Kind::kSynthetic) {
    if (scenarios.family != "recirculating") throw ConfigError("unknown synthetic family '" + scenarios.family + "'");
    if (scenarios.distribution.empty()) throw ConfigError("synthetic scenarios need a 'distribution'");
    if (!grid) throw ConfigError("synthetic scenarios need a 'grid' section");
  } else {
    if (scenarios.fields.empty()) throw ConfigError("file scenarios need at least one entry in 'fields'");
    double total = 0.0;
    for (const auto& f : scenarios.fields) {
      if (!(f.weight >= 0.0 && f.weight <= 1.0)) throw ConfigError("field weight outside [0, 1]");
      total += f.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("field weights must sum to 1 within 1e-9");
  }
}

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  c.base_dir = base_dir;

  if (j.contains("grid")) c.grid = grid_from_json(j["grid"]);

  if (j.contains("scenarios")) {
    const json& s = j["scenarios"];
    const std::string source = s.value("source", "synthetic");
    if (s.contains("diffusivity")) c.scenarios.diffusivity = number<double>(s["diffusivity"], "diffusivity");
    if (source == "synthetic") {
      c.scenarios.kind = ScenarioSource::Kind::kSynthetic;
      c.scenarios.family = s.value("family", "recirculating");
      if (s.contains("strength_scale")) c.scenarios.strength_scale = number<double>(s["strength_scale"], "strength_scale");
      c.scenarios.distribution = s.value("distribution", "");
      if (s.contains("cdf_points")) c.scenarios.cdf_points = s["cdf_points"].get<std::vector<double>>();
    } else if (source == "files") {
      c.scenarios.kind = ScenarioSource::Kind::kFiles;
      for (const auto& f : s.at("fields")) {
        FieldEntry e;
        e.path = f.at("path").get<std::string>();
        e.weight = f.contains("weight") ? number<double>(f["weight"], "weight") : 1.0;
        e.sample_value = f.contains("xi") ? number<double>(f["xi"], "xi") : 0.0;
        c.scenarios.fields.push_back(e);
      }
    } else {
      throw ConfigError("scenario source must be 'synthetic' or 'files'");
    }
  }

  if (j.contains("boundary")) {
    static const char* names[6] = {"x-", "x+", "y-", "y+", "z-", "z+"};
    for (int f = 0; f < 6; ++f) {
      if (j["boundary"].contains(names[f])) c.boundary.faces[f] = boundary_kind(j["boundary"][names[f]]);
    }
  }

  if (j.contains("dt")) c.dt = number<double>(j["dt"], "dt");
  if (j.contains("steps")) c.steps = number<std::size_t>(j["steps"], "steps");
  if (j.contains("eps_acc")) c.eps_acc = number<double>(j["eps_acc"], "eps_acc");
  c.raw_threshold = j.value("raw_threshold", false);
  if (j.contains("constraints")) {
    const json& k = j["constraints"];
    if (k.contains("forbidden")) c.forbidden_boxes = boxes(k["forbidden"], "forbidden");
    if (k.contains("sensing_ignore")) c.sensing_ignore_boxes = boxes(k["sensing_ignore"], "sensing_ignore");
    if (k.contains("occupied_zone")) c.occupied_boxes = boxes(k["occupied_zone"], "occupied_zone");
  }
  if (j.contains("sensors") && !j["sensors"].is_null()) c.sensors = number<std::size_t>(j["sensors"], "sensors");
  if (j.contains("min_coverage") && !j["min_coverage"].is_null()) {
    c.min_coverage = number<double>(j["min_coverage"], "min_coverage");
  }
  if (j.contains("removal")) {
    const std::string r = j["removal"];
    if (r == "covered") c.removal = RemovalMode::kCovered;
    else if (r == "literal") c.removal = RemovalMode::kLiteral;
    else throw ConfigError("'removal' must be 'covered' or 'literal'");
  }
  if (j.contains("workers")) c.workers = number<std::size_t>(j["workers"], "workers");
  if (j.contains("out")) c.out = c.resolve(j["out"].get<std::string>());

  if (j.contains("validate")) {
    const json& v = j["validate"];
    if (v.contains("tolerance")) c.validate.tolerance = number<double>(v["tolerance"], "tolerance");
    if (v.contains("release_center")) c.validate.release_center = vec3(v["release_center"], "release_center");
    if (v.contains("release_width")) c.validate.release_width = number<double>(v["release_width"], "release_width");
    if (v.contains("steps")) c.validate.steps = number<std::size_t>(v["steps"], "steps");
    if (v.contains("cfl_target")) c.validate.cfl_target = number<double>(v["cfl_target"], "cfl_target");
  }
  if (j.contains("converge") && j["converge"].contains("samples")) {
    c.converge_samples = j["converge"]["samples"].get<std::vector<std::size_t>>();
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return parse_config(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Distribution parse_distribution(const std::string& spec, const std::filesystem::path& base_dir) {
  std::istringstream in(spec);
  std::string kind;
  in >> kind;
  if (kind == "gaussian") {
    double mu = 0.0, sigma = 0.0;
    if (!(in >> mu >> sigma)) throw ConfigError("distribution 'gaussian' needs mu and sigma");
    try {
      return Distribution::gaussian(mu, sigma);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (kind == "kde") {
    std::string file;
    if (!(in >> file)) throw ConfigError("distribution 'kde' needs a data file");
    const auto path = std::filesystem::path(file).is_absolute() ? std::filesystem::path(file) : base_dir / file;
    std::ifstream data_in(path);
    if (!data_in) throw ConfigError("cannot open kde data file " + path.string());
    LineReader reader(data_in, path.string());
    std::vector<double> data;
    std::string line;
    while (reader.next(line)) {
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      data.push_back(reader.to_double(reader.tokens(line, 1)[0]));
    }
    try {
      return fit_kde(std::move(data));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  throw ConfigError("distribution must be 'gaussian mu sigma' or 'kde <datafile>', got '" + spec + "'");
}

std::vector<double> default_cdf_points(std::size_t m) {
  switch (m) {
    case 2: return {0.0, 1.0};
    case 3: return {0.0, 0.5, 1.0};
    case 5: return {0.0, 0.3, 0.5, 0.7, 1.0};
    case 7: return {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    case 9: return {0.0, 0.1, 0.3, 0.4, 0.5, 0.6, 0.7, 0.9, 1.0};
    default: break;
  }
  if (m == 0) throw ConfigError("sample count must be positive");
  if (m == 1) return {0.5};
  std::vector<double> p(m);
  for (std::size_t i = 0; i < m; ++i) p[i] = static_cast<double>(i) / static_cast<double>(m - 1);
  return p;
}

nlohmann::ordered_json grid_to_json(const StructuredGrid& g) {
  nlohmann::ordered_json j;
  j["dims"] = {g.nx(), g.ny(), g.nz()};
  j["spacing"] = {g.spacing()[0], g.spacing()[1], g.spacing()[2]};
  j["origin"] = {g.origin()[0], g.origin()[1], g.origin()[2]};
  return j;
}

StructuredGrid grid_from_json(const json& j) {
  if (!j.contains("dims") || !j.contains("spacing")) throw ConfigError("'grid' needs 'dims' and 'spacing'");
  const auto& d = j["dims"];
  if (!d.is_array() || d.size() != 3) throw ConfigError("'grid.dims' must have 3 entries");
  std::array<std::size_t, 3> dims{};
  for (int a = 0; a < 3; ++a) dims[a] = number<std::size_t>(d[a], "grid.dims");
  const Vec3 spacing = vec3(j["spacing"], "grid.spacing");
  const Vec3 origin = j.contains("origin") ? vec3(j["origin"], "grid.origin") : Vec3{0.0, 0.0, 0.0};
  try {
    return StructuredGrid(dims, spacing, origin);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

}  // namespace pfsensor::app
