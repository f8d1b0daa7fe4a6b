#include "pam/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pam/error.hpp"
#include "pam/random.hpp"

namespace pam {
namespace {

constexpr double kPointZoneRadius = 0.5e-3;
constexpr double kOnGridTolerance = 1e-9;

void check_region(const SimulationRegion& region, double x, double z) {
  if (!std::isfinite(x) || !std::isfinite(z) || !region.contains(x, z)) {
    throw InvalidInput("source at (" + std::to_string(x * 1e3) + ", " + std::to_string(z * 1e3) +
                       ") mm lies outside the simulation region");
  }
}

double tukey(std::size_t j, std::size_t n, double taper) {
  if (n <= 1 || taper <= 0) return 1.0;
  const double pos = static_cast<double>(j) / static_cast<double>(n - 1);
  const double half = 0.5 * std::min(taper, 1.0);
  if (pos < half) return 0.5 * (1.0 - std::cos(std::numbers::pi * pos / half));
  if (pos > 1.0 - half) return 0.5 * (1.0 - std::cos(std::numbers::pi * (1.0 - pos) / half));
  return 1.0;
}

}  // namespace

WaveformSpec default_waveform_spec(WaveformType type) {
  WaveformSpec spec;
  spec.type = type;
  spec.frequency = 1e6;
  spec.duration = type == WaveformType::inertial ? 1e-6 : 20e-6;
  return spec;
}

std::vector<double> make_waveform(const WaveformSpec& spec, double fs) {
  if (!(fs > 0) || !std::isfinite(fs)) throw InvalidInput("waveform: sampling frequency must be > 0");
  if (spec.impulse) return {1.0};
  if (!(spec.duration > 0) || !(spec.frequency >= 0)) {
    throw InvalidInput("waveform: duration must be > 0 and frequency >= 0");
  }
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round(spec.duration * fs)));
  std::vector<double> w(n);
  if (spec.type == WaveformType::inertial) {
    const auto c = static_cast<double>(n / 2);
    const double s = static_cast<double>(n) / 6.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double t = static_cast<double>(j) - c;
      w[j] = std::exp(-t * t / (2.0 * s * s)) * std::cos(2.0 * std::numbers::pi * spec.frequency * t / fs);
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      w[j] = tukey(j, n, spec.taper) *
             std::cos(2.0 * std::numbers::pi * spec.frequency * static_cast<double>(j) / fs);
    }
  }
  double peak = 0.0;
  for (double v : w) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) throw InvalidInput("waveform: all samples are zero");
  for (double& v : w) v /= peak;
  return w;
}

std::vector<double> default_waveform(WaveformType type, double fs) {
  return make_waveform(default_waveform_spec(type), fs);
}

std::string to_string(WaveformType type) { return type == WaveformType::inertial ? "inertial" : "non-inertial"; }

WaveformType waveform_type_from_string(const std::string& s) {
  if (s == "inertial") return WaveformType::inertial;
  if (s == "non-inertial" || s == "non_inertial") return WaveformType::non_inertial;
  throw InvalidInput("unknown waveform type '" + s + "'");
}

SimulationRegion region_around(const GridSpec& grid, double margin) {
  const double x1 = grid.x_at(grid.nx - 1);
  const double z1 = grid.z_at(grid.nz - 1);
  return {grid.origin_x - margin, x1 + margin, std::max(std::numeric_limits<double>::min(), grid.origin_z - margin),
          z1 + margin};
}

ZoneMasks rasterize_zones(const ZoneSpec& spec, const GridSpec& grid) {
  ZoneMasks masks;
  masks.grid = grid;
  masks.signal.assign(grid.num_pixels(), 0);
  masks.noise.assign(grid.num_pixels(), 0);
  for (std::size_t n = 0; n < grid.num_pixels(); ++n) {
    const Point3 p = grid.position(n);
    bool in_signal = false, in_ring = false;
    for (const auto& d : spec.discs) {
      const double r = std::hypot(p.x - d.x, p.z - d.z);
      in_signal = in_signal || r <= d.radius;
      in_ring = in_ring || r <= d.radius + spec.noise_margin;
    }
    masks.signal[n] = in_signal ? 1 : 0;
    masks.noise[n] = (in_ring && !in_signal) ? 1 : 0;
  }
  return masks;
}

Scene make_point_scene(const std::vector<Point3>& positions, const AcquisitionGeometry& geom,
                       const WaveformSpec& waveform, std::uint64_t seed, std::int64_t start_sample) {
  return make_point_scene(positions, geom, waveform, seed, start_sample, region_around(geom.grid));
}

Scene make_point_scene(const std::vector<Point3>& positions, const AcquisitionGeometry& geom,
                       const WaveformSpec& waveform, std::uint64_t seed, std::int64_t start_sample,
                       const SimulationRegion& region) {
  if (positions.empty()) throw InvalidInput("make_point_scene: no source positions");
  geom.validate();
  Scene scene;
  scene.geometry = geom;
  scene.seed = seed;
  scene.waveform_spec = waveform;
  const auto w = make_waveform(waveform, geom.sampling_frequency);
  for (const auto& p : positions) {
    check_region(region, p.x, p.z);
    scene.events.push_back({p.x, p.z, start_sample, w, 1.0});
    scene.zone_spec.discs.push_back({p.x, p.z, kPointZoneRadius});
    scene.truth.push_back({p.x, 0.0, p.z});
  }
  scene.zones = rasterize_zones(scene.zone_spec, geom.grid);
  return scene;
}

Scene make_cloud_scene(const Point3& center, double diameter, double density, const AcquisitionGeometry& geom,
                       const WaveformSpec& waveform, std::uint64_t seed, std::size_t start_range) {
  return make_cloud_scene(center, diameter, density, geom, waveform, seed, start_range, region_around(geom.grid));
}

Scene make_cloud_scene(const Point3& center, double diameter, double density, const AcquisitionGeometry& geom,
                       const WaveformSpec& waveform, std::uint64_t seed, std::size_t start_range,
                       const SimulationRegion& region) {
  if (!(diameter > 0) || !(density > 0)) throw InvalidInput("make_cloud_scene: diameter and density must be > 0");
  geom.validate();
  const double radius = 0.5 * diameter;
  const double radius_mm = radius * 1e3;
  const auto count = static_cast<std::size_t>(
      std::max(1.0, std::round(density * std::numbers::pi * radius_mm * radius_mm)));
  const std::size_t range = start_range == 0 ? geom.num_samples : start_range;

  Scene scene;
  scene.geometry = geom;
  scene.seed = seed;
  scene.waveform_spec = waveform;
  const auto w = make_waveform(waveform, geom.sampling_frequency);
  Rng rng(seed);
  scene.events.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double r = radius * std::sqrt(rng.uniform());
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    const double x = center.x + r * std::cos(theta);
    const double z = center.z + r * std::sin(theta);
    check_region(region, x, z);
    const auto start = rng.uniform_int(0, static_cast<std::int64_t>(range) - 1);
    scene.events.push_back({x, z, start, w, 1.0});
  }
  scene.zone_spec.discs.push_back({center.x, center.z, radius});
  scene.zones = rasterize_zones(scene.zone_spec, geom.grid);
  scene.truth.push_back({center.x, 0.0, center.z});
  return scene;
}

RfFrame synthesize_rf(const Scene& scene, std::size_t num_samples, PropagationMode mode) {
  if (num_samples == 0) throw InvalidInput("synthesize_rf: num_samples must be >= 1");
  const auto& geom = scene.geometry;
  const std::size_t nm = geom.num_sensors();
  const auto nt = static_cast<std::int64_t>(num_samples);
  RfFrame y(nm, num_samples);

#pragma omp parallel for schedule(static)
  for (std::size_t m = 0; m < nm; ++m) {
    auto trace = y.trace(m);
    for (const auto& ev : scene.events) {
      const Point3 src{ev.x, 0.0, ev.z};
      const auto len = static_cast<std::int64_t>(ev.waveform.size());
      if (mode == PropagationMode::nearest) {
        const std::int64_t first = ev.start_sample + window_delay(geom, m, src) - 1;
        for (std::int64_t j = 0; j < len; ++j) {
          const std::int64_t k = first + j;
          if (k >= 0 && k < nt) trace[static_cast<std::size_t>(k)] += ev.amplitude * ev.waveform[j];
        }
      } else {
        const Point3& s = geom.sensor_positions[m];
        const double tof = std::hypot(s.x - src.x, s.y - src.y, s.z - src.z) / geom.speed_of_sound *
                           geom.sampling_frequency;
        const double pos = std::max(1.0, tof) - static_cast<double>(geom.receive_offset) - 1.0;
        const double base = std::floor(pos);
        const double frac = pos - base;
        const std::int64_t first = ev.start_sample + static_cast<std::int64_t>(base);
        for (std::int64_t j = 0; j < len; ++j) {
          const double v = ev.amplitude * ev.waveform[j];
          const std::int64_t k = first + j;
          if (k >= 0 && k < nt) trace[static_cast<std::size_t>(k)] += (1.0 - frac) * v;
          if (k + 1 >= 0 && k + 1 < nt) trace[static_cast<std::size_t>(k + 1)] += frac * v;
        }
      }
    }
  }
  return y;
}

SourceCube rasterize_scene(const Scene& scene, std::size_t num_samples) {
  const auto& grid = scene.geometry.grid;
  SourceCube cube(grid.nx, grid.nz, num_samples);
  for (const auto& ev : scene.events) {
    const double fi = (ev.x - grid.origin_x) / grid.pitch_x;
    const double fj = (ev.z - grid.origin_z) / grid.pitch_z;
    const double ri = std::round(fi), rj = std::round(fj);
    if (ri < 0 || rj < 0 || ri >= static_cast<double>(grid.nx) || rj >= static_cast<double>(grid.nz) ||
        std::abs(grid.x_at(static_cast<std::size_t>(ri)) - ev.x) > kOnGridTolerance ||
        std::abs(grid.z_at(static_cast<std::size_t>(rj)) - ev.z) > kOnGridTolerance) {
      throw InvalidInput("rasterize_scene: event is not on a grid node");
    }
    if (ev.start_sample < 0) throw InvalidInput("rasterize_scene: negative start sample");
    const auto i = static_cast<std::size_t>(ri), j = static_cast<std::size_t>(rj);
    for (std::size_t s = 0; s < ev.waveform.size(); ++s) {
      const auto k = static_cast<std::size_t>(ev.start_sample) + s;
      if (k < num_samples) cube(i, j, k) += ev.amplitude * ev.waveform[s];
    }
  }
  return cube;
}

NoisyFrame add_noise_with_realization(const RfFrame& y, double snr_db, std::uint64_t seed) {
  if (std::isnan(snr_db)) throw InvalidInput("add_noise: snr_db is NaN");
  NoisyFrame out{y, RfFrame(y.num_sensors(), y.nt())};
  if (snr_db == std::numeric_limits<double>::infinity()) return out;

  double power = 0.0;
  for (double v : y.flat()) power += v * v;
  if (y.size() > 0) power /= static_cast<double>(y.size());
  if (!(power > 0)) throw InvalidInput("add_noise: zero-power signal with finite SNR");

  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  Rng rng(seed);
  auto noisy = out.frame.flat();
  auto noise = out.noise.flat();
  for (std::size_t e = 0; e < noisy.size(); ++e) {
    noise[e] = sigma * rng.normal();
    noisy[e] += noise[e];
  }
  out.frame.noise = NoiseInfo{snr_db, seed};
  return out;
}

RfFrame add_noise(const RfFrame& y, double snr_db, std::uint64_t seed) {
  return add_noise_with_realization(y, snr_db, seed).frame;
}

}  // namespace pam
