#include "pam/harness/scene_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pam/error.hpp"
#include "pam/tensor_io.hpp"

namespace pam::harness {

using nlohmann::json;

std::string scene_to_json(const Scene& scene) {
  json j;
  j["seed"] = scene.seed;
  const auto& w = scene.waveform_spec;
  j["waveform"] = {{"type", to_string(w.type)},
                   {"frequency_hz", w.frequency},
                   {"duration_s", w.duration},
                   {"taper", w.taper},
                   {"impulse", w.impulse}};
  const auto shared = make_waveform(w, scene.geometry.sampling_frequency);
  json events = json::array();
  for (const auto& ev : scene.events) {
    json e = {{"x_m", ev.x}, {"z_m", ev.z}, {"start_sample", ev.start_sample}, {"amplitude", ev.amplitude}};
    if (ev.waveform != shared) e["samples"] = ev.waveform;
    events.push_back(std::move(e));
  }
  j["events"] = std::move(events);
  json discs = json::array();
  for (const auto& d : scene.zone_spec.discs) discs.push_back({{"x_m", d.x}, {"z_m", d.z}, {"radius_m", d.radius}});
  j["zones"] = {{"noise_margin_m", scene.zone_spec.noise_margin}, {"discs", std::move(discs)}};
  json truth = json::array();
  for (const auto& p : scene.truth) truth.push_back({{"x_m", p.x}, {"z_m", p.z}});
  j["truth"] = std::move(truth);
  return j.dump(1) + "\n";
}

Scene scene_from_json(const std::string& text, const AcquisitionGeometry& geom) {
  try {
    const json j = json::parse(text);
    Scene s;
    s.geometry = geom;
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("waveform")) {
      const auto& w = j.at("waveform");
      s.waveform_spec.type = waveform_type_from_string(w.value("type", std::string("inertial")));
      s.waveform_spec.frequency = w.value("frequency_hz", 1e6);
      s.waveform_spec.duration = w.value("duration_s", 1e-6);
      s.waveform_spec.taper = w.value("taper", 0.25);
      s.waveform_spec.impulse = w.value("impulse", false);
    }
    const auto shared = make_waveform(s.waveform_spec, geom.sampling_frequency);
    for (const auto& e : j.at("events")) {
      SourceEvent ev;
      ev.x = e.at("x_m").get<double>();
      ev.z = e.at("z_m").get<double>();
      ev.start_sample = e.value("start_sample", std::int64_t{0});
      ev.amplitude = e.value("amplitude", 1.0);
      ev.waveform = e.contains("samples") ? e.at("samples").get<std::vector<double>>() : shared;
      if (ev.waveform.empty()) throw IoError("scene: event with an empty waveform");
      s.events.push_back(std::move(ev));
    }
    if (j.contains("zones")) {
      const auto& z = j.at("zones");
      s.zone_spec.noise_margin = z.value("noise_margin_m", 2e-3);
      for (const auto& d : z.at("discs")) {
        s.zone_spec.discs.push_back({d.at("x_m").get<double>(), d.at("z_m").get<double>(), d.at("radius_m").get<double>()});
      }
    }
    if (j.contains("truth")) {
      for (const auto& p : j.at("truth")) s.truth.push_back({p.at("x_m").get<double>(), 0.0, p.at("z_m").get<double>()});
    }
    s.zones = rasterize_zones(s.zone_spec, geom.grid);
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("scene: ") + e.what());
  } catch (const InvalidInput& e) {
    throw IoError(std::string("scene: ") + e.what());
  }
}

void save_scene(const std::filesystem::path& path, const Scene& scene) { write_text(path, scene_to_json(scene)); }

Scene load_scene(const std::filesystem::path& path, const AcquisitionGeometry& geom) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return scene_from_json(buf.str(), geom);
}

}  // namespace pam::harness
