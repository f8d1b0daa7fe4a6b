#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pam/geometry.hpp"
#include "pam/tensor.hpp"

namespace pam {

enum class WaveformType { inertial, non_inertial };

/// Emission waveform parameters. Durations in seconds, frequencies in hertz.
///
/// inertial:     N = round(duration * f_s) samples (1 us default), c = floor(N / 2),
///               w[j] = exp(-(j - c)^2 / (2 s^2)) * cos(2 pi f (j - c) / f_s), s = N / 6.
/// non_inertial: N = round(duration * f_s) samples (20 us default),
///               w[j] = tukey(j; taper) * cos(2 pi f j / f_s), rescaled to max |w| = 1.
struct WaveformSpec {
  WaveformType type = WaveformType::inertial;
  double frequency = 1e6;
  double duration = 1e-6;
  double taper = 0.25;  ///< Tukey taper fraction (non-inertial only)
  /// Replaces the formula with a single sample of value 1.
  bool impulse = false;
};

WaveformSpec default_waveform_spec(WaveformType type);
std::vector<double> make_waveform(const WaveformSpec& spec, double sampling_frequency);
/// Documented defaults: 1 us inertial pulse at 1 MHz, 20 us non-inertial 1 MHz tone.
std::vector<double> default_waveform(WaveformType type, double sampling_frequency);

std::string to_string(WaveformType type);
WaveformType waveform_type_from_string(const std::string& s);

/// One emitter. Position in meters, start sample counted from the emission time origin (0-based).
struct SourceEvent {
  double x = 0.0;
  double z = 0.0;
  std::int64_t start_sample = 0;
  std::vector<double> waveform;
  double amplitude = 1.0;
};

/// Axis-aligned box sources must lie in. It may extend beyond the reconstruction grid.
struct SimulationRegion {
  double x_min = 0.0, x_max = 0.0;
  double z_min = 0.0, z_max = 0.0;

  bool contains(double x, double z) const noexcept {
    return x >= x_min && x <= x_max && z >= z_min && z <= z_max;
  }
};

/// Grid bounding box grown by `margin` on every side (z kept > 0).
SimulationRegion region_around(const GridSpec& grid, double margin = 5e-3);

/// Discs of the signal zone; the noise zone is the ring of width `noise_margin` around their union.
struct ZoneSpec {
  struct Disc {
    double x = 0.0, z = 0.0, radius = 0.0;
  };
  std::vector<Disc> discs;
  double noise_margin = 2e-3;
};

ZoneMasks rasterize_zones(const ZoneSpec& spec, const GridSpec& grid);

struct Scene {
  AcquisitionGeometry geometry;
  std::vector<SourceEvent> events;
  ZoneSpec zone_spec;
  ZoneMasks zones;
  /// Emitter positions used for localization metrics (point scenes) or the cloud center.
  std::vector<Point3> truth;
  WaveformSpec waveform_spec;  ///< spec the event waveforms were generated from
  std::uint64_t seed = 0;
};

/// One event per position (meters), emitted at `start_sample`. Signal zone: 0.5 mm discs.
Scene make_point_scene(const std::vector<Point3>& positions, const AcquisitionGeometry& geom,
                       const WaveformSpec& waveform, std::uint64_t seed, std::int64_t start_sample = 0);
Scene make_point_scene(const std::vector<Point3>& positions, const AcquisitionGeometry& geom,
                       const WaveformSpec& waveform, std::uint64_t seed, std::int64_t start_sample,
                       const SimulationRegion& region);

/// Uniform disc of max(1, round(density * pi * (d/2)^2)) emitters; density in sources/mm^2,
/// center and diameter in meters. Start samples are drawn uniformly from [0, start_range).
/// A start_range of 0 means the full recording length.
Scene make_cloud_scene(const Point3& center, double diameter, double density, const AcquisitionGeometry& geom,
                       const WaveformSpec& waveform, std::uint64_t seed, std::size_t start_range = 0);
Scene make_cloud_scene(const Point3& center, double diameter, double density, const AcquisitionGeometry& geom,
                       const WaveformSpec& waveform, std::uint64_t seed, std::size_t start_range,
                       const SimulationRegion& region);

enum class PropagationMode {
  nearest,  ///< integer delay rule shared with the forward operator
  linear,   ///< fractional delay split between the two neighbouring samples
};

/// Geometric propagation of every event to every sensor into an N_m x num_samples frame.
RfFrame synthesize_rf(const Scene& scene, std::size_t num_samples, PropagationMode mode = PropagationMode::nearest);

/// Source cube of a scene whose events all sit on grid nodes (within 1 nm); throws InvalidInput otherwise.
SourceCube rasterize_scene(const Scene& scene, std::size_t num_samples);

struct NoisyFrame {
  RfFrame frame;
  RfFrame noise;
};

/// Adds white Gaussian noise of variance mean(y^2) / 10^(snr_db / 10). snr_db = +inf leaves y unchanged.
NoisyFrame add_noise_with_realization(const RfFrame& y, double snr_db, std::uint64_t seed);
RfFrame add_noise(const RfFrame& y, double snr_db, std::uint64_t seed);

}  // namespace pam
