#include "pam/harness/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pam/error.hpp"

namespace pam::harness {
namespace {

using Settings = std::map<std::string, std::string>;

const char* const kSolverMethods[] = {"sp", "sptv", "spred"};

Settings defaults() {
  Settings s{
      {"experiment.preset", ""},
      {"geometry.sensors", "128"},
      {"geometry.pitch_mm", "0.3"},
      {"geometry.center_x_mm", "0"},
      {"geometry.speed_of_sound", "1540"},
      {"geometry.sampling_frequency_mhz", "10"},
      {"geometry.recording_samples", "2000"},
      {"geometry.receive_offset", "auto"},
      {"grid.origin_x_mm", "-15"},
      {"grid.origin_z_mm", "55"},
      {"grid.pitch_x_mm", "0.2"},
      {"grid.pitch_z_mm", "0.2"},
      {"grid.nx", "101"},
      {"grid.nz", "151"},
      {"scenario.type", "point-lateral"},
      {"scenario.sources_mm", ""},
      {"scenario.scale", "1"},
      {"scenario.snap_to_grid", "false"},
      {"scenario.waveform", "inertial"},
      {"scenario.waveform_frequency_mhz", "1"},
      {"scenario.waveform_duration_us", ""},
      {"scenario.waveform_taper", "0.25"},
      {"scenario.start_sample", "0"},
      {"scenario.cloud_center_mm", "-7,70"},
      {"scenario.cloud_diameter_mm", "2"},
      {"scenario.cloud_density", "100"},
      {"scenario.cloud_start", "window"},
      {"scenario.scene_file", ""},
      {"scenario.noise_margin_mm", "2"},
      {"experiment.snr_db", "10"},
      {"experiment.window_fraction", "0.2"},
      {"experiment.replicas", "1"},
      {"experiment.seed", "0"},
      {"experiment.workers", "1"},
      {"experiment.output", "out"},
      {"experiment.methods", "tddas,sp,sptv,spred"},
      {"experiment.dynamic_range_db", "40"},
      {"experiment.validate_experiments", "100"},
      {"experiment.validate_max_sources", "5"},
      {"experiment.validate_interpolation", "false"},
  };
  for (const char* m : kSolverMethods) {
    const std::string p = std::string("solver.") + m + ".";
    const bool fista = std::string(m) == "sp";
    s[p + "lambda_fraction"] = "0.05";
    s[p + "gamma_ratio"] = "0.5";
    s[p + "mu_ratio"] = "1";
    s[p + "rho"] = "auto";
    s[p + "max_iterations"] = fista ? "300" : "100";
    s[p + "tolerance"] = "1e-5";
    s[p + "inner_cg_iterations"] = "50";
    s[p + "inner_cg_tolerance"] = "1e-6";
    s[p + "fixed_point_iterations"] = "3";
    s[p + "fixed_point_tolerance"] = "1e-4";
    s[p + "power_iterations"] = "100";
    s[p + "seed"] = "0";
    s[p + "denoiser_sigma_lateral"] = "1";
    s[p + "denoiser_sigma_axial"] = "1";
    s[p + "denoiser_sigma_temporal"] = "1";
  }
  return s;
}

Settings reduced_common() {
  return {
      {"geometry.sensors", "32"},      {"geometry.recording_samples", "1000"}, {"geometry.receive_offset", "auto"},
      {"geometry.pitch_mm", "0.9"},
      {"grid.origin_x_mm", "-4.8"},    {"grid.origin_z_mm", "12.8"},           {"grid.pitch_x_mm", "0.4"},
      {"grid.pitch_z_mm", "0.4"},      {"grid.nx", "19"},                      {"grid.nz", "25"},
      {"scenario.scale", "0.25"},      {"scenario.snap_to_grid", "true"},      {"experiment.replicas", "10"},
  };
}

const std::map<std::string, Settings>& preset_table() {
  static const std::map<std::string, Settings> table = [] {
    std::map<std::string, Settings> t;
    t["toy"] = {
        {"geometry.sensors", "3"},
        {"geometry.pitch_mm", "0.6"},
        {"geometry.recording_samples", "10"},
        {"geometry.receive_offset", "0"},
        {"grid.origin_x_mm", "-0.2"},
        {"grid.origin_z_mm", "0.2"},
        {"grid.pitch_x_mm", "0.2"},
        {"grid.pitch_z_mm", "0.2"},
        {"grid.nx", "3"},
        {"grid.nz", "5"},
        {"scenario.type", "points"},
        {"scenario.sources_mm", "0,0.8"},
        {"scenario.waveform", "impulse"},
        {"scenario.start_sample", "1"},
        {"scenario.noise_margin_mm", "0.2"},
        {"experiment.snr_db", "inf"},
        {"experiment.window_fraction", "1"},
        {"experiment.validate_max_sources", "3"},
    };
    Settings axial = reduced_common();
    axial["scenario.type"] = "point-axial";
    t["reduced-point-axial"] = axial;
    Settings lateral = reduced_common();
    lateral["scenario.type"] = "point-lateral";
    t["reduced-point-lateral"] = lateral;
    Settings cloud = reduced_common();
    cloud["scenario.type"] = "cloud";
    t["reduced-cloud"] = cloud;
    t["full-point-lateral"] = {{"scenario.type", "point-lateral"}};
    t["full-point-axial"] = {{"scenario.type", "point-axial"}};
    t["full-cloud"] = {{"scenario.type", "cloud"}};
    return t;
  }();
  return table;
}

// ---------------------------------------------------------------------------
// Value parsing; every failure names its key.

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  if (v == "-inf") return -std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError(key, "expected a number, got '" + raw + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(key, "expected a non-negative integer, got '" + raw + "'");
  }
  return out;
}

std::int64_t to_i64(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::int64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end) throw ConfigError(key, "expected an integer, got '" + raw + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + raw + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

Point3 to_point_mm(const std::string& key, const std::string& raw) {
  const auto parts = split(raw, ',');
  if (parts.size() != 2) throw ConfigError(key, "expected 'x,z' in mm, got '" + raw + "'");
  return {to_double(key, parts[0]) * 1e-3, 0.0, to_double(key, parts[1]) * 1e-3};
}

std::vector<Point3> to_points_mm(const std::string& key, const std::string& raw) {
  std::vector<Point3> out;
  if (trim(raw).empty()) return out;
  for (const auto& item : split(raw, ';')) {
    if (!item.empty()) out.push_back(to_point_mm(key, item));
  }
  return out;
}

ScenarioType scenario_from_string(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "point-lateral") return ScenarioType::point_lateral;
  if (t == "point-axial") return ScenarioType::point_axial;
  if (t == "points") return ScenarioType::points;
  if (t == "cloud") return ScenarioType::cloud;
  if (t == "custom") return ScenarioType::custom;
  throw ConfigError(key, "unknown scenario '" + v + "' (point-lateral, point-axial, points, cloud, custom)");
}

class Resolver {
 public:
  explicit Resolver(const Settings& s) : s_(s) {}

  const std::string& raw(const std::string& key) const {
    const auto it = s_.find(key);
    if (it == s_.end()) throw ConfigError(key, "missing");
    return it->second;
  }
  double num(const std::string& key) const { return to_double(key, raw(key)); }
  double positive(const std::string& key) const {
    const double v = num(key);
    if (!(v > 0)) throw ConfigError(key, "must be > 0");
    return v;
  }
  double non_negative(const std::string& key) const {
    const double v = num(key);
    if (!(v >= 0)) throw ConfigError(key, "must be >= 0");
    return v;
  }
  std::size_t count(const std::string& key, std::size_t min = 1) const {
    const auto v = to_u64(key, raw(key));
    if (v < min) throw ConfigError(key, "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }
  bool flag(const std::string& key) const { return to_bool(key, raw(key)); }

 private:
  const Settings& s_;
};

ExperimentConfig resolve(const Settings& s) {
  const Resolver r(s);
  ExperimentConfig c;
  c.settings = s;

  // Acquisition
  auto& g = c.geometry;
  const std::size_t sensors = r.count("geometry.sensors");
  const double pitch = r.positive("geometry.pitch_mm") * 1e-3;
  g.sensor_positions = linear_array(sensors, pitch, r.num("geometry.center_x_mm") * 1e-3);
  g.speed_of_sound = r.positive("geometry.speed_of_sound");
  g.sampling_frequency = r.positive("geometry.sampling_frequency_mhz") * 1e6;
  g.num_samples = r.count("geometry.recording_samples");
  g.grid.origin_x = r.num("grid.origin_x_mm") * 1e-3;
  g.grid.origin_z = r.num("grid.origin_z_mm") * 1e-3;
  if (!(g.grid.origin_z > 0)) throw ConfigError("grid.origin_z_mm", "grid must lie below the probe (> 0)");
  g.grid.pitch_x = r.positive("grid.pitch_x_mm") * 1e-3;
  g.grid.pitch_z = r.positive("grid.pitch_z_mm") * 1e-3;
  g.grid.nx = r.count("grid.nx");
  g.grid.nz = r.count("grid.nz");

  // Experiment
  c.snr_db = r.num("experiment.snr_db");
  if (std::isinf(c.snr_db) && c.snr_db < 0) throw ConfigError("experiment.snr_db", "must not be -inf");
  c.window_fraction = r.num("experiment.window_fraction");
  if (!(c.window_fraction > 0 && c.window_fraction <= 1)) {
    throw ConfigError("experiment.window_fraction", "must lie in (0, 1]");
  }
  if (c.window_samples() < 1) throw ConfigError("experiment.window_fraction", "window keeps no samples");
  c.replicas = r.count("experiment.replicas");
  c.seed = to_u64("experiment.seed", r.raw("experiment.seed"));
  c.workers = r.count("experiment.workers");
  c.output = trim(r.raw("experiment.output"));
  if (c.output.empty()) throw ConfigError("experiment.output", "must not be empty");
  c.methods.clear();
  for (const auto& m : split(r.raw("experiment.methods"), ',')) {
    if (m.empty()) continue;
    try {
      c.methods.push_back(method_from_string(m));
    } catch (const InvalidInput& e) {
      throw ConfigError("experiment.methods", e.what());
    }
  }
  if (c.methods.empty()) throw ConfigError("experiment.methods", "at least one method required");
  c.dynamic_range_db = r.positive("experiment.dynamic_range_db");
  c.validate_experiments = r.count("experiment.validate_experiments");
  c.validate_max_sources = r.count("experiment.validate_max_sources");
  c.validate_interpolation = r.flag("experiment.validate_interpolation");

  const std::string offset = trim(r.raw("geometry.receive_offset"));
  c.auto_receive_offset = offset == "auto";
  if (c.auto_receive_offset) {
    AcquisitionGeometry probe = g;
    probe.receive_offset = 0;
    g.receive_offset = earliest_arrival_offset(probe);
  } else {
    g.receive_offset = to_i64("geometry.receive_offset", offset);
    if (g.receive_offset < 0) throw ConfigError("geometry.receive_offset", "must be >= 0 or 'auto'");
  }
  try {
    g.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("geometry", e.what());
  }

  // Scenario
  auto& sc = c.scenario;
  sc.type = scenario_from_string("scenario.type", r.raw("scenario.type"));
  sc.scale = r.positive("scenario.scale");
  sc.snap_to_grid = r.flag("scenario.snap_to_grid");
  const std::string wf = trim(r.raw("scenario.waveform"));
  if (wf == "impulse") {
    sc.waveform.impulse = true;
  } else {
    try {
      sc.waveform = default_waveform_spec(waveform_type_from_string(wf));
    } catch (const InvalidInput& e) {
      throw ConfigError("scenario.waveform", e.what());
    }
  }
  sc.waveform.frequency = r.non_negative("scenario.waveform_frequency_mhz") * 1e6;
  if (!trim(r.raw("scenario.waveform_duration_us")).empty()) {
    sc.waveform.duration = r.positive("scenario.waveform_duration_us") * 1e-6;
  }
  sc.waveform.taper = r.non_negative("scenario.waveform_taper");
  sc.start_sample = to_i64("scenario.start_sample", r.raw("scenario.start_sample"));
  sc.cloud_center = to_point_mm("scenario.cloud_center_mm", r.raw("scenario.cloud_center_mm"));
  sc.cloud_diameter = r.positive("scenario.cloud_diameter_mm") * 1e-3;
  sc.cloud_density = r.positive("scenario.cloud_density");
  const std::string start = trim(r.raw("scenario.cloud_start"));
  if (start != "window" && start != "recording") {
    throw ConfigError("scenario.cloud_start", "expected 'window' or 'recording'");
  }
  sc.cloud_start_in_window = start == "window";
  sc.scene_file = trim(r.raw("scenario.scene_file"));
  sc.noise_margin = r.non_negative("scenario.noise_margin_mm") * 1e-3;

  sc.sources = to_points_mm("scenario.sources_mm", r.raw("scenario.sources_mm"));
  if (sc.sources.empty()) {
    if (sc.type == ScenarioType::point_lateral) sc.sources = {{-5e-3, 0, 72e-3}, {-3e-3, 0, 72e-3}};
    if (sc.type == ScenarioType::point_axial) sc.sources = {{-3e-3, 0, 64e-3}, {-3e-3, 0, 72e-3}};
  }
  if (sc.type == ScenarioType::points && sc.sources.empty()) {
    throw ConfigError("scenario.sources_mm", "a points scenario needs at least one source");
  }
  if (sc.type == ScenarioType::custom) {
    if (sc.scene_file.empty()) throw ConfigError("scenario.scene_file", "required for a custom scenario");
    if (!std::filesystem::exists(sc.scene_file)) {
      throw ConfigError("scenario.scene_file", "file not found: " + sc.scene_file.string());
    }
  }
  for (auto& p : sc.sources) {
    p.x *= sc.scale;
    p.z *= sc.scale;
    if (sc.snap_to_grid) p = g.grid.nearest_node(p);
  }
  sc.cloud_center.x *= sc.scale;
  sc.cloud_center.z *= sc.scale;
  if (sc.snap_to_grid) sc.cloud_center = g.grid.nearest_node(sc.cloud_center);

  // Solvers
  for (const char* m : kSolverMethods) {
    const std::string p = std::string("solver.") + m + ".";
    MethodConfig mc;
    mc.lambda_fraction = r.non_negative(p + "lambda_fraction");
    mc.gamma_ratio = r.non_negative(p + "gamma_ratio");
    mc.mu_ratio = r.non_negative(p + "mu_ratio");
    if (trim(r.raw(p + "rho")) == "auto") {
      mc.solver.rho = static_cast<double>(g.num_sensors());
    } else {
      mc.solver.rho = r.positive(p + "rho");
    }
    mc.solver.max_iterations = r.count(p + "max_iterations");
    mc.solver.tolerance = r.positive(p + "tolerance");
    mc.solver.inner_cg_iterations = r.count(p + "inner_cg_iterations");
    mc.solver.inner_cg_tolerance = r.positive(p + "inner_cg_tolerance");
    mc.solver.fixed_point_iterations = r.count(p + "fixed_point_iterations");
    mc.solver.fixed_point_tolerance = r.positive(p + "fixed_point_tolerance");
    mc.solver.power_iterations = r.count(p + "power_iterations");
    mc.solver.seed = to_u64(p + "seed", r.raw(p + "seed"));
    mc.denoiser_sigma_lateral = r.non_negative(p + "denoiser_sigma_lateral");
    mc.denoiser_sigma_axial = r.non_negative(p + "denoiser_sigma_axial");
    mc.denoiser_sigma_temporal = r.non_negative(p + "denoiser_sigma_temporal");
    c.method_config[method_from_string(m)] = mc;
  }
  c.method_config[Method::tddas] = MethodConfig{};
  return c;
}

Settings overlay(Settings base, const Settings& changes) {
  for (const auto& [k, v] : changes) {
    if (!base.count(k)) throw ConfigError(k, "unknown setting");
    base[k] = v;
  }
  return base;
}

}  // namespace

std::string to_string(ScenarioType t) {
  switch (t) {
    case ScenarioType::point_lateral: return "point-lateral";
    case ScenarioType::point_axial: return "point-axial";
    case ScenarioType::points: return "points";
    case ScenarioType::cloud: return "cloud";
    case ScenarioType::custom: return "custom";
  }
  return "?";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::tddas: return "tddas";
    case Method::sp: return "sp";
    case Method::sptv: return "sptv";
    case Method::spred: return "spred";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  for (Method m : kAllMethods) {
    if (to_string(m) == s) return m;
  }
  throw InvalidInput("unknown method '" + s + "' (tddas, sp, sptv, spred)");
}

std::size_t ExperimentConfig::window_samples() const {
  return static_cast<std::size_t>(std::floor(window_fraction * static_cast<double>(geometry.num_samples)));
}

AcquisitionGeometry ExperimentConfig::window_geometry() const {
  AcquisitionGeometry g = geometry;
  g.num_samples = window_samples();
  return g;
}

const MethodConfig& ExperimentConfig::method(Method m) const { return method_config.at(m); }

std::int64_t earliest_arrival_offset(const AcquisitionGeometry& geom) {
  std::int64_t lowest = std::numeric_limits<std::int64_t>::max();
  for (std::size_t m = 0; m < geom.num_sensors(); ++m) {
    for (std::size_t n = 0; n < geom.num_pixels(); ++n) {
      lowest = std::min(lowest, compute_delay(geom.sensor_positions[m], geom.grid.position(n), geom.speed_of_sound,
                                              geom.sampling_frequency));
    }
  }
  return lowest - 1;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : preset_table()) out.push_back(name);
  return out;
}

ExperimentConfig preset(const std::string& name) {
  const auto& t = preset_table();
  const auto it = t.find(name);
  if (it == t.end()) throw ConfigError("experiment.preset", "unknown preset '" + name + "'");
  Settings s = overlay(defaults(), it->second);
  s["experiment.preset"] = name;
  return resolve(s);
}

ExperimentConfig config_from_settings(const Settings& flat) { return resolve(overlay(defaults(), flat)); }

ExperimentConfig override_settings(const ExperimentConfig& cfg, const Settings& changes) {
  return resolve(overlay(cfg.settings, changes));
}

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.what());
  }
  Settings entries;
  std::string preset_name;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (full == "experiment.preset") {
        preset_name = trim(value.data());
      } else {
        entries[full] = trim(value.data());
      }
    }
  }
  Settings base = defaults();
  if (!preset_name.empty()) base = preset(preset_name).settings;
  return resolve(overlay(base, entries));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("--config", "cannot read " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("--config", std::string("malformed manifest: ") + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) throw ConfigError("config", "manifest has no config");
    Settings flat;
    for (const auto& [k, v] : j["config"].items()) {
      if (!v.is_string()) throw ConfigError(k, "manifest values must be strings");
      flat[k] = v.get<std::string>();
    }
    return config_from_settings(flat);
  }
  return parse_config(buf.str());
}

void validate(const ExperimentConfig& cfg) { (void)config_from_settings(cfg.settings); }

}  // namespace pam::harness
