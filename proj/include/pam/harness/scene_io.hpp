#pragma once

#include <filesystem>
#include <string>

#include "pam/geometry.hpp"
#include "pam/simulator.hpp"

namespace pam::harness {

/// JSON scene description (positions in meters):
///
///   { "seed": 7,
///     "waveform": {"type": "inertial", "frequency_hz": 1e6, "duration_s": 1e-6, "taper": 0.25, "impulse": false},
///     "events": [{"x_m": -0.0008, "z_m": 0.016, "start_sample": 0, "amplitude": 1.0}, ...],
///     "zones": {"noise_margin_m": 0.002, "discs": [{"x_m": ..., "z_m": ..., "radius_m": ...}]},
///     "truth": [{"x_m": ..., "z_m": ...}] }
///
/// An event may carry its own "samples" array instead of using the shared waveform.
std::string scene_to_json(const Scene& scene);

/// Rebuilds a scene on `geom`; zones are rasterized on its grid. Throws IoError on malformed input.
Scene scene_from_json(const std::string& text, const AcquisitionGeometry& geom);

void save_scene(const std::filesystem::path& path, const Scene& scene);
Scene load_scene(const std::filesystem::path& path, const AcquisitionGeometry& geom);

}  // namespace pam::harness
