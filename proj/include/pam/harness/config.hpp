#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pam/geometry.hpp"
#include "pam/simulator.hpp"
#include "pam/solvers.hpp"

namespace pam::harness {

enum class ScenarioType { point_lateral, point_axial, points, cloud, custom };

std::string to_string(ScenarioType t);

struct ScenarioConfig {
  ScenarioType type = ScenarioType::point_axial;
  /// Source positions in meters (before scaling). Filled from the preset when not given.
  std::vector<Point3> sources;
  /// Positions and the cloud center are multiplied by `scale`; the cloud diameter is not.
  double scale = 1.0;
  bool snap_to_grid = false;
  WaveformSpec waveform;
  std::int64_t start_sample = 0;
  Point3 cloud_center{-7e-3, 0.0, 70e-3};
  double cloud_diameter = 2e-3;
  double cloud_density = 100.0;  ///< sources per mm^2
  /// Cloud start times are drawn over the reconstruction window (true) or the whole recording.
  bool cloud_start_in_window = true;
  std::filesystem::path scene_file;
  double noise_margin = 2e-3;
};

enum class Method { tddas, sp, sptv, spred };

std::string to_string(Method m);
Method method_from_string(const std::string& s);
inline constexpr Method kAllMethods[] = {Method::tddas, Method::sp, Method::sptv, Method::spred};

/// Per-method settings. Weights are relative: lambda = lambda_fraction * ||A^T y||_inf,
/// gamma = gamma_ratio * lambda, mu = mu_ratio * lambda.
struct MethodConfig {
  double lambda_fraction = 0.05;
  double gamma_ratio = 0.5;
  double mu_ratio = 1.0;
  SolverConfig solver;
  /// Denoiser standard deviations in pixels, pixels, samples.
  double denoiser_sigma_lateral = 1.0;
  double denoiser_sigma_axial = 1.0;
  double denoiser_sigma_temporal = 1.0;
};

/// Resolved experiment settings.
///
/// The typed fields are derived from `settings`, the flat "section.key" -> text map that
/// is also written to the manifest. Change values through override_settings so both stay
/// in step; reloading a snapshot then reproduces the run bit for bit.
struct ExperimentConfig {
  std::map<std::string, std::string> settings;

  AcquisitionGeometry geometry;  ///< num_samples is the full recording length
  bool auto_receive_offset = false;
  ScenarioConfig scenario;
  double snr_db = 10.0;
  double window_fraction = 0.2;
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::filesystem::path output = "out";
  std::vector<Method> methods{Method::tddas, Method::sp, Method::sptv, Method::spred};
  std::map<Method, MethodConfig> method_config;
  double dynamic_range_db = 40.0;
  std::size_t validate_experiments = 100;
  /// Source configuration of the forward-model check: random on-grid impulses.
  std::size_t validate_max_sources = 5;
  bool validate_interpolation = false;

  /// Leading samples kept for reconstruction: floor(window_fraction * N_t).
  std::size_t window_samples() const;
  /// Geometry of the reconstruction window (num_samples = window_samples()).
  AcquisitionGeometry window_geometry() const;
  const MethodConfig& method(Method m) const;
};

/// Named presets: toy, reduced-point-axial, reduced-point-lateral, reduced-cloud,
/// full-point-lateral, full-point-axial, full-cloud.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Parses INI text. A "preset" key in [experiment] selects the base the file overrides.
/// Throws ConfigError naming "section.key" on any invalid or unknown entry.
ExperimentConfig parse_config(const std::string& text);
/// Reads an INI file, or the "config" snapshot of a run manifest (.json).
ExperimentConfig load_config(const std::filesystem::path& path);
/// Builds a config from a complete flat settings map.
ExperimentConfig config_from_settings(const std::map<std::string, std::string>& flat);
/// Copy of `cfg` with the given "section.key" entries replaced.
ExperimentConfig override_settings(const ExperimentConfig& cfg, const std::map<std::string, std::string>& changes);

/// Every invariant of the configuration; throws ConfigError with the field path.
void validate(const ExperimentConfig& cfg);

/// Receive offset that puts the earliest pixel arrival at sample 1 of the window.
std::int64_t earliest_arrival_offset(const AcquisitionGeometry& geom);

}  // namespace pam::harness
