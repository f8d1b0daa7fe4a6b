#include "pam/harness/commands.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "pam/das.hpp"
#include "pam/error.hpp"
#include "pam/forward_operator.hpp"
#include "pam/harness/manifest.hpp"
#include "pam/harness/scene_io.hpp"
#include "pam/metrics.hpp"
#include "pam/random.hpp"
#include "pam/tensor_io.hpp"

namespace pam::harness {
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void say(const Log& log, const std::string& line) {
  if (log) log(line);
}

void make_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
}

std::string num(double v) { return format_double(v); }

std::string trace_csv(const std::vector<IterationRecord>& trace) {
  std::string out = "iteration,objective,primal_residual,dual_residual\n";
  for (const auto& r : trace) {
    out += fmt::format("{},{},{},{}\n", r.iteration, num(r.objective), num(r.primal_residual), num(r.dual_residual));
  }
  return out;
}

bool is_point_scenario(ScenarioType t) {
  return t == ScenarioType::point_axial || t == ScenarioType::point_lateral || t == ScenarioType::points;
}

bool is_region_scenario(ScenarioType t) { return t == ScenarioType::cloud; }

void refresh_manifest(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.config = cfg.settings;
  for (std::size_t r = 1; r <= cfg.replicas; ++r) manifest.replica_seeds.push_back(cfg.seed + r);
  manifest.files = inventory(cfg.output);
  write_manifest(cfg.output, manifest);
}

template <class F>
double guarded(F&& f) {
  try {
    return f();
  } catch (const UndefinedMetric&) {
    return kNaN;
  }
}

}  // namespace

std::uint64_t replica_seed(const ExperimentConfig& cfg, std::size_t replica) { return cfg.seed + replica; }

std::uint64_t noise_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

fs::path replica_dir(const ExperimentConfig& cfg, std::size_t replica) {
  return cfg.output / fmt::format("replica_{:03d}", replica);
}

fs::path method_dir(const ExperimentConfig& cfg, std::size_t replica, Method m) {
  return replica_dir(cfg, replica) / to_string(m);
}

void for_each_replica(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::max<std::size_t>(1, std::min(workers, count));
  if (threads == 1) {
    for (std::size_t r = 1; r <= count; ++r) fn(r);
    return;
  }
  std::atomic<std::size_t> next{1};
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        {
          std::lock_guard lock(guard);
          if (failure) return;
        }
        const std::size_t r = next.fetch_add(1);
        if (r > count) return;
        try {
          fn(r);
        } catch (...) {
          std::lock_guard lock(guard);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

Scene build_scene(const ExperimentConfig& cfg, std::size_t replica) {
  const auto& sc = cfg.scenario;
  const std::uint64_t seed = replica_seed(cfg, replica);
  Scene scene;
  try {
    switch (sc.type) {
      case ScenarioType::point_lateral:
      case ScenarioType::point_axial:
      case ScenarioType::points:
        scene = make_point_scene(sc.sources, cfg.geometry, sc.waveform, seed, sc.start_sample);
        break;
      case ScenarioType::cloud:
        scene = make_cloud_scene(sc.cloud_center, sc.cloud_diameter, sc.cloud_density, cfg.geometry, sc.waveform, seed,
                                 sc.cloud_start_in_window ? cfg.window_samples() : 0);
        if (sc.snap_to_grid) {
          for (auto& ev : scene.events) {
            const Point3 p = cfg.geometry.grid.nearest_node({ev.x, 0.0, ev.z});
            ev.x = p.x;
            ev.z = p.z;
          }
        }
        break;
      case ScenarioType::custom:
        scene = load_scene(sc.scene_file, cfg.geometry);
        scene.seed = seed;
        break;
    }
  } catch (const InvalidInput& e) {
    throw ConfigError("scenario", e.what());
  }
  if (sc.type != ScenarioType::custom) {
    scene.zone_spec.noise_margin = sc.noise_margin;
    scene.zones = rasterize_zones(scene.zone_spec, cfg.geometry.grid);
  }
  return scene;
}

ReplicaData simulate_replica(const ExperimentConfig& cfg, std::size_t replica) {
  ReplicaData d;
  d.scene = build_scene(cfg, replica);
  d.clean = synthesize_rf(d.scene, cfg.geometry.num_samples);
  try {
    d.noisy = add_noise(d.clean, cfg.snr_db, noise_seed(replica_seed(cfg, replica)));
  } catch (const InvalidInput& e) {
    throw ConfigError("experiment.snr_db", e.what());
  }
  return d;
}

void cmd_simulate(const ExperimentConfig& cfg, const Log& log) {
  make_dirs(cfg.output);
  write_tensor(cfg.output / "delays.pamt", to_tensor(build_delay_table(cfg.window_geometry())));
  for_each_replica(cfg.replicas, cfg.workers, [&](std::size_t r) {
    const auto dir = replica_dir(cfg, r);
    make_dirs(dir);
    const ReplicaData d = simulate_replica(cfg, r);
    save_scene(dir / "scene.json", d.scene);
    write_tensor(dir / "rf_clean.pamt", to_tensor(d.clean));
    write_tensor(dir / "rf_noisy.pamt", to_tensor(d.noisy));
    say(log, fmt::format("simulate: replica {} seed {} ({} events)", r, replica_seed(cfg, r), d.scene.events.size()));
  });
  refresh_manifest(cfg);
}

MethodResult run_method(const ExperimentConfig& cfg, Method m, const DelayOperator& op, const RfFrame& y) {
  MethodResult out;
  if (m == Method::tddas) {
    out.map = td_das(y, op);
    return out;
  }
  const MethodConfig& mc = cfg.method(m);
  SolverConfig sc = mc.solver;
  out.lambda = mc.lambda_fraction * lambda_max(op, y);
  sc.lambda = out.lambda;
  switch (m) {
    case Method::sp:
      out.report = fista_solve(op, y, sc);
      break;
    case Method::sptv:
      out.gamma = sc.gamma = mc.gamma_ratio * out.lambda;
      out.report = admm_sptv_solve(op, y, sc);
      break;
    case Method::spred: {
      out.mu = sc.mu = mc.mu_ratio * out.lambda;
      const bool identity =
          mc.denoiser_sigma_lateral == 0 && mc.denoiser_sigma_axial == 0 && mc.denoiser_sigma_temporal == 0;
      const Denoiser f = identity ? identity_denoiser()
                                  : gaussian_denoiser(mc.denoiser_sigma_lateral, mc.denoiser_sigma_axial,
                                                      mc.denoiser_sigma_temporal);
      out.report = admm_spred_solve(op, y, sc, f);
      break;
    }
    case Method::tddas:
      break;
  }
  out.map = power_map(out.report->estimate, op.grid());
  return out;
}

void cmd_beamform(const ExperimentConfig& cfg, Method m, const Log& log) {
  const DelayOperator op(cfg.window_geometry());
  const std::size_t window = cfg.window_samples();
  for_each_replica(cfg.replicas, cfg.workers, [&](std::size_t r) {
    const RfFrame full = frame_from_tensor(read_tensor(replica_dir(cfg, r) / "rf_noisy.pamt"));
    if (full.num_sensors() != op.num_sensors() || full.nt() < window) {
      throw IoError(fmt::format("replica {}: rf frame shape does not match the configuration", r));
    }
    const RfFrame y = full.truncated(window);
    const auto dir = method_dir(cfg, r, m);
    make_dirs(dir);
    MethodResult res;
    try {
      res = run_method(cfg, m, op, y);
    } catch (const DivergedSolve& e) {
      write_text(dir / "trace.csv", trace_csv(e.trace()));
      throw;
    }
    write_tensor(dir / "map.pamt", to_tensor(res.map));
    write_text(dir / "map.csv", map_to_csv(res.map));
    write_bytes(dir / "map.pgm", render_pgm(res.map, cfg.dynamic_range_db));
    if (res.report) {
      const auto& rep = *res.report;
      write_text(dir / "trace.csv", trace_csv(rep.trace));
      write_tensor(dir / "estimate.pamt", to_tensor(rep.estimate));
      write_text(dir / "solve.json",
                 fmt::format("{{\n \"method\": \"{}\",\n \"lambda\": {},\n \"gamma\": {},\n \"mu\": {},\n"
                             " \"iterations\": {},\n \"converged\": {},\n \"lipschitz\": {},\n \"restarts\": {},\n"
                             " \"fixed_point_stalled\": {}\n}}\n",
                             to_string(m), num(res.lambda), num(res.gamma), num(res.mu), rep.iterations,
                             rep.converged, num(rep.lipschitz), rep.restarts, rep.fixed_point_stalled));
      say(log, fmt::format("beamform {}: replica {} {} iterations{}", to_string(m), r, rep.iterations,
                           rep.converged ? " (converged)" : ""));
    } else {
      say(log, fmt::format("beamform {}: replica {}", to_string(m), r));
    }
  });
  refresh_manifest(cfg);
}

MetricRow evaluate_map(const ExperimentConfig& cfg, const Scene& scene, const PowerMap& map) {
  MetricRow row;
  row.fwhm_axial = row.fwhm_lateral = row.position_error = row.pcid = row.cnr = row.dice = kNaN;
  row.scenario = to_string(cfg.scenario.type);
  const auto type = cfg.scenario.type;
  const bool point = is_point_scenario(type) || (type == ScenarioType::custom && !scene.truth.empty());
  const bool region = is_region_scenario(type) || (type == ScenarioType::custom && scene.zones.signal_count() > 0);

  if (point && map.max_value() > 0) {
    const PixelIndex peak = map.argmax();
    const auto ax = fwhm(map, peak, Axis::axial);
    const auto lat = fwhm(map, peak, Axis::lateral);
    row.fwhm_axial = ax.width * 1e3;
    row.fwhm_lateral = lat.width * 1e3;
    row.fwhm_truncated = ax.truncated() || lat.truncated();
    try {
      const auto loc = localize(scene.truth, map);
      row.position_error = loc.mean_error * 1e3;
      if (loc.detections.size() == 2) row.pcid = pcid(map, loc.detections[0], loc.detections[1]);
    } catch (const UndefinedMetric&) {
    }
  }
  if (region) {
    row.cnr = guarded([&] { return cnr(map, scene.zones); });
    row.dice = guarded([&] { return dice(map, scene.zones); });
  }
  return row;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out =
      "scenario,replica,seed,method,fwhm_axial_mm,fwhm_lateral_mm,fwhm_truncated,position_error_mm,pcid_db,cnr_db,dice\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.scenario, r.replica, r.seed, to_string(r.method), num(r.fwhm_axial),
                       num(r.fwhm_lateral), r.fwhm_truncated ? 1 : 0, num(r.position_error), num(r.pcid), num(r.cnr),
                       num(r.dice));
  }
  return out;
}

std::string aggregate_table(const ExperimentConfig& cfg, const std::vector<MetricRow>& rows) {
  const bool region = is_region_scenario(cfg.scenario.type);
  auto column = [&](Method m, double MetricRow::*field, int decimals, bool floor) -> std::string {
    std::vector<double> v;
    for (const auto& r : rows) {
      if (r.method == m && !std::isnan(r.*field)) v.push_back(r.*field);
    }
    if (v.empty()) return "n/a";
    return format_mean_std(v, decimals, floor);
  };
  std::string out;
  if (region) {
    out = "| Method | CNR [dB] | Dice |\n|---|---|---|\n";
  } else {
    out = "| Method | Axial FWHM [mm] | Lateral FWHM [mm] | Position Error [mm] | Separation Power [dB] |\n"
          "|---|---|---|---|---|\n";
  }
  for (Method m : cfg.methods) {
    if (region) {
      out += fmt::format("| {} | {} | {} |\n", to_string(m), column(m, &MetricRow::cnr, 1, true),
                         column(m, &MetricRow::dice, 2, false));
    } else {
      out += fmt::format("| {} | {} | {} | {} | {} |\n", to_string(m), column(m, &MetricRow::fwhm_axial, 1, false),
                         column(m, &MetricRow::fwhm_lateral, 2, false), column(m, &MetricRow::position_error, 1, false),
                         column(m, &MetricRow::pcid, 1, true));
    }
  }
  return out;
}

Evaluation cmd_evaluate(const ExperimentConfig& cfg, const Log& log) {
  const AcquisitionGeometry geom = cfg.window_geometry();
  std::vector<Scene> scenes;
  for (std::size_t r = 1; r <= cfg.replicas; ++r) {
    const auto path = replica_dir(cfg, r) / "scene.json";
    if (!fs::exists(path)) throw ConfigError("scenario", "missing ground truth " + path.string());
    scenes.push_back(load_scene(path, geom));
  }
  std::vector<Method> available;
  for (Method m : cfg.methods) {
    bool all = true;
    for (std::size_t r = 1; r <= cfg.replicas && all; ++r) all = fs::exists(method_dir(cfg, r, m) / "map.pamt");
    if (all) available.push_back(m);
  }
  if (available.empty()) throw IoError("evaluate: no method has maps for every replica");

  Evaluation ev;
  for (std::size_t r = 1; r <= cfg.replicas; ++r) {
    for (Method m : available) {
      const PowerMap map = map_from_tensor(read_tensor(method_dir(cfg, r, m) / "map.pamt"), geom.grid);
      MetricRow row = evaluate_map(cfg, scenes[r - 1], map);
      row.replica = r;
      row.seed = replica_seed(cfg, r);
      row.method = m;
      ev.rows.push_back(row);
    }
  }
  ExperimentConfig shown = cfg;
  shown.methods = available;
  ev.csv = metrics_csv(ev.rows);
  ev.table = aggregate_table(shown, ev.rows);
  write_text(cfg.output / "metrics.csv", ev.csv);
  write_text(cfg.output / "summary.md", ev.table);
  refresh_manifest(cfg);
  say(log, ev.table);
  return ev;
}

ForwardValidation cmd_validate_forward(const ExperimentConfig& cfg, const Log& log) {
  if (cfg.validate_interpolation) {
    throw ConfigError("experiment.validate_interpolation",
                      "the interpolating propagation mode is excluded from the exact forward-model check");
  }
  if (cfg.validate_experiments < 1) throw ConfigError("experiment.validate_experiments", "must be >= 1");
  const AcquisitionGeometry geom = cfg.window_geometry();
  const DelayOperator op(geom);
  const auto& grid = geom.grid;
  const auto nt = static_cast<std::int64_t>(geom.num_samples);

  ForwardValidation v;
  std::string csv = "experiment,seed,sources,nmse\n";
  for (std::size_t e = 1; e <= cfg.validate_experiments; ++e) {
    const std::uint64_t seed = cfg.seed + e;
    Rng rng(seed);
    Scene scene;
    scene.geometry = geom;
    scene.seed = seed;
    const auto count = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(cfg.validate_max_sources)));
    for (std::size_t s = 0; s < count; ++s) {
      const auto n = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(grid.num_pixels()) - 1));
      std::int64_t nearest = nt;
      for (std::size_t m = 0; m < op.num_sensors(); ++m) nearest = std::min(nearest, op.table().at(m, n));
      // Keep the emission visible on at least one sensor.
      const std::int64_t latest = std::max<std::int64_t>(0, nt - nearest);
      const Point3 p = grid.position(n);
      scene.events.push_back({p.x, p.z, rng.uniform_int(0, latest), {1.0}, rng.uniform(0.5, 1.5)});
    }
    const RfFrame synth = synthesize_rf(scene, geom.num_samples);
    const RfFrame ref = op.apply_forward(rasterize_scene(scene, geom.num_samples));
    const double err = nmse(ref, synth);
    v.nmse.push_back(err);
    if (e == 1 || err > v.worst) {
      v.worst = err;
      v.worst_seed = seed;
    }
    csv += fmt::format("{},{},{},{}\n", e, seed, count, num(err));
  }
  v.mean = mean(v.nmse);
  v.stddev = stddev(v.nmse);
  v.passed = v.mean <= kForwardNmseBound;
  make_dirs(cfg.output);
  write_text(cfg.output / "validate_forward.csv", csv);
  say(log, fmt::format("validate-forward: {} scenes, NMSE mean {:.3e} std {:.3e}, worst {:.3e} (seed {}): {}",
                       v.nmse.size(), v.mean, v.stddev, v.worst, v.worst_seed, v.passed ? "PASS" : "FAIL"));
  return v;
}

void cmd_render(const fs::path& map_file, double dynamic_range_db, const fs::path& output) {
  if (!(dynamic_range_db > 0)) throw ConfigError("--range", "dynamic range must be > 0 dB");
  const PowerMap map = map_from_tensor(read_tensor(map_file));
  write_bytes(output, render_pgm(map, dynamic_range_db));
}

Evaluation cmd_run_all(const ExperimentConfig& cfg, const Log& log) {
  cmd_simulate(cfg, log);
  for (Method m : cfg.methods) cmd_beamform(cfg, m, log);
  return cmd_evaluate(cfg, log);
}

}  // namespace pam::harness
