#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pam/checksum.hpp"
#include "pam/error.hpp"
#include "pam/harness/commands.hpp"
#include "pam/harness/config.hpp"
#include "pam/harness/manifest.hpp"
#include "pam/harness/scene_io.hpp"
#include "pam/tensor_io.hpp"

using namespace pam;
using namespace pam::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("pam_test_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig toy_at(const fs::path& out, std::map<std::string, std::string> extra = {}) {
  extra["experiment.output"] = out.string();
  return override_settings(preset("toy"), extra);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("presets and source positions") {
  const auto lateral = preset("full-point-lateral");
  REQUIRE(lateral.scenario.sources.size() == 2);
  CHECK(lateral.scenario.sources[0].x == doctest::Approx(-5e-3));
  CHECK(lateral.scenario.sources[0].z == doctest::Approx(72e-3));
  CHECK(lateral.scenario.sources[1].x == doctest::Approx(-3e-3));
  CHECK(lateral.geometry.num_sensors() == 128);
  CHECK(lateral.window_samples() == 400);
  const auto axial = preset("full-point-axial");
  CHECK(axial.scenario.sources[0].z == doctest::Approx(64e-3));
  CHECK(axial.scenario.sources[1].z == doctest::Approx(72e-3));

  auto cloud = preset("full-cloud");
  cloud.replicas = 1;
  CHECK(build_scene(cloud, 1).events.size() == 314);

  const auto reduced = preset("reduced-point-axial");
  CHECK(reduced.geometry.num_sensors() == 32);
  CHECK(reduced.geometry.grid.pitch_x == doctest::Approx(0.4e-3));
  CHECK(static_cast<double>(reduced.window_samples()) / reduced.geometry.sampling_frequency == doctest::Approx(20e-6));
  for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name));
  CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("config parsing") {
  const auto cfg = parse_config(
      "[experiment]\npreset = toy\nreplicas = 3\nseed = 40\n[solver.sp]\nlambda_fraction = 0.1\n");
  CHECK(cfg.replicas == 3);
  CHECK(cfg.seed == 40);
  CHECK(cfg.method(Method::sp).lambda_fraction == 0.1);
  CHECK(cfg.settings.at("experiment.replicas") == "3");

  try {
    parse_config("[experiment]\nreplicas = 0\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "experiment.replicas");
  }
  try {
    parse_config("[grid]\ncolour = red\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "grid.colour");
  }
  CHECK_THROWS_AS(parse_config("[experiment]\nwindow_fraction = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nwindow_fraction = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[scenario]\ntype = custom\nscene_file = /no/such/scene.json\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[solver.sptv]\nrho = 0\n"), ConfigError);
}

TEST_CASE("replica seeds and simulate outputs") {
  const auto out = scratch("seeds");
  const auto cfg = toy_at(out, {{"experiment.replicas", "3"}, {"experiment.seed", "100"},
                                {"experiment.snr_db", "10"}, {"experiment.workers", "2"}});
  cmd_simulate(cfg);
  for (std::size_t r = 1; r <= 3; ++r) {
    CHECK(replica_seed(cfg, r) == 100 + r);
    CHECK(fs::exists(replica_dir(cfg, r) / "scene.json"));
    CHECK(fs::exists(replica_dir(cfg, r) / "rf_clean.pamt"));
    const auto noisy = frame_from_tensor(read_tensor(replica_dir(cfg, r) / "rf_noisy.pamt"));
    const auto again = simulate_replica(cfg, r).noisy;
    CHECK(std::vector<double>(noisy.flat().begin(), noisy.flat().end()) ==
          std::vector<double>(again.flat().begin(), again.flat().end()));
  }
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "delays.pamt"));
  CHECK(noise_seed(101) != 101);
}

TEST_CASE("window truncation") {
  const auto out = scratch("window");
  auto cfg = toy_at(out, {{"experiment.window_fraction", "0.2"}});
  CHECK(cfg.window_samples() == 2);
  CHECK(cfg.window_geometry().num_samples == 2);
  cfg = toy_at(out, {{"experiment.window_fraction", "1"}});
  CHECK(cfg.window_samples() == 10);
  const auto reduced = preset("reduced-cloud");
  CHECK(reduced.window_samples() == static_cast<std::size_t>(std::floor(0.2 * 1000)));
}

TEST_CASE("scene files round trip") {
  const auto cfg = preset("reduced-cloud");
  const auto scene = build_scene(cfg, 2);
  const auto back = scene_from_json(scene_to_json(scene), cfg.geometry);
  REQUIRE(back.events.size() == scene.events.size());
  for (std::size_t e = 0; e < scene.events.size(); ++e) {
    CHECK(back.events[e].x == scene.events[e].x);
    CHECK(back.events[e].z == scene.events[e].z);
    CHECK(back.events[e].start_sample == scene.events[e].start_sample);
    CHECK(back.events[e].waveform == scene.events[e].waveform);
  }
  CHECK(back.zones.signal == scene.zones.signal);
  CHECK(back.zones.noise == scene.zones.noise);
  CHECK(back.seed == scene.seed);
  CHECK_THROWS_AS(scene_from_json("{not json", cfg.geometry), IoError);
}

TEST_CASE("toy Sp trace matches the golden file") {
  const auto out = scratch("golden");
  const auto cfg = toy_at(out, {{"experiment.methods", "sp"}});
  cmd_simulate(cfg);
  cmd_beamform(cfg, Method::sp);
  const auto trace = slurp(method_dir(cfg, 1, Method::sp) / "trace.csv");
  const auto golden = slurp(fs::path(PAM_TEST_DATA) / "golden" / "toy_sp_trace.csv");
  REQUIRE_FALSE(golden.empty());

  auto objectives = [](const std::string& text) {
    std::vector<double> v;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto a = line.find(',');
      const auto b = line.find(',', a + 1);
      v.push_back(std::stod(line.substr(a + 1, b - a - 1)));
    }
    return v;
  };
  const auto got = objectives(trace), want = objectives(golden);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-9);
}

TEST_CASE("evaluate: identical replicas have zero spread") {
  const auto out = scratch("identical");
  const auto cfg = toy_at(out, {{"experiment.replicas", "2"}, {"experiment.methods", "tddas,sp"}});
  const auto ev = cmd_run_all(cfg);
  CHECK(ev.table.find("| tddas | 0.7 (0.0) | 0.40 (0.00) | 0.0 (0.0) | n/a |") != std::string::npos);
  CHECK(ev.rows.size() == 4);
  CHECK(fs::exists(out / "metrics.csv"));
  CHECK(slurp(out / "metrics.csv").rfind("scenario,replica,seed,method,", 0) == 0);
  CHECK(ev.rows[0].scenario == "points");
  CHECK(fs::exists(out / "summary.md"));
  CHECK(ev.rows[0].position_error == 0.0);
}

TEST_CASE("evaluate needs ground truth and maps") {
  const auto out = scratch("missing");
  const auto cfg = toy_at(out);
  CHECK_THROWS_AS(cmd_evaluate(cfg), ConfigError);
  cmd_simulate(cfg);
  CHECK_THROWS_AS(cmd_evaluate(cfg), IoError);
  CHECK_THROWS_AS(cmd_beamform(toy_at(scratch("nothing")), Method::sp), IoError);
}

TEST_CASE("aggregate table headers") {
  auto cfg = preset("reduced-point-lateral");
  std::vector<MetricRow> rows;
  for (Method m : kAllMethods) {
    MetricRow r;
    r.method = m;
    r.fwhm_axial = 1.0;
    r.fwhm_lateral = 0.5;
    r.position_error = 0.1;
    r.pcid = -30.0;
    r.cnr = r.dice = std::nan("");
    rows.push_back(r);
  }
  const auto table = aggregate_table(cfg, rows);
  CHECK(table.rfind("| Method | Axial FWHM [mm] | Lateral FWHM [mm] | Position Error [mm] | Separation Power [dB] |", 0) == 0);
  for (const char* name : {"| tddas |", "| sp |", "| sptv |", "| spred |"}) CHECK(table.find(name) != std::string::npos);
  CHECK(table.find("<-20") != std::string::npos);
  cfg = preset("reduced-cloud");
  CHECK(aggregate_table(cfg, rows).rfind("| Method | CNR [dB] | Dice |", 0) == 0);
}

TEST_CASE("forward validation") {
  const auto out = scratch("validate");
  const auto v = cmd_validate_forward(toy_at(out));
  CHECK(v.nmse.size() == 100);
  CHECK(v.passed);
  CHECK(v.mean <= kForwardNmseBound);
  CHECK(fs::exists(out / "validate_forward.csv"));
  CHECK_THROWS_AS(cmd_validate_forward(toy_at(out, {{"experiment.validate_interpolation", "true"}})), ConfigError);
  CHECK_THROWS_AS(cmd_validate_forward(toy_at(out, {{"experiment.validate_experiments", "0"}})), ConfigError);
}

TEST_CASE("manifest covers every file and reloads the config") {
  const auto out = scratch("manifest");
  const auto cfg = toy_at(out, {{"experiment.methods", "tddas"}});
  cmd_run_all(cfg);
  const auto m = manifest_from_json(slurp(out / "manifest.json"));
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") ++files;
  }
  CHECK(m.files.size() == files);
  for (const auto& f : m.files) CHECK(sha256_file(out / f.path) == f.sha256);
  CHECK(m.replica_seeds == std::vector<std::uint64_t>{1});
  const auto reloaded = load_config(out / "manifest.json");
  CHECK(reloaded.settings == cfg.settings);
}

TEST_CASE("render command") {
  const auto out = scratch("render");
  const auto cfg = toy_at(out, {{"experiment.methods", "tddas"}});
  cmd_run_all(cfg);
  cmd_render(method_dir(cfg, 1, Method::tddas) / "map.pamt", 30.0, out / "r.pgm");
  CHECK(fs::file_size(out / "r.pgm") == std::string("P5\n3 5\n65535\n").size() + 30);
  write_text(out / "corrupt.pamt", "garbage");
  CHECK_THROWS_AS(cmd_render(out / "corrupt.pamt", 30.0, out / "x.pgm"), IoError);
  CHECK_THROWS_AS(cmd_render(out / "corrupt.pamt", 0.0, out / "x.pgm"), ConfigError);
}
