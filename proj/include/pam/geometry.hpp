#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace pam {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Lateral (i) and axial (j) pixel coordinates, zero-based.
struct PixelIndex {
  std::size_t i = 0;
  std::size_t j = 0;

  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

/// Regular 2D imaging grid in the (x, z) plane. Lengths in meters.
///
/// Pixels are flattened column by column: all axial pixels of lateral column
/// i come before column i + 1, so n = i * nz + j. This is also the row-major
/// order of an (nx, nz) array.
struct GridSpec {
  double origin_x = 0.0;
  double origin_z = 0.0;
  double pitch_x = 1.0;
  double pitch_z = 1.0;
  std::size_t nx = 1;
  std::size_t nz = 1;

  std::size_t num_pixels() const noexcept { return nx * nz; }
  std::size_t flat_index(PixelIndex p) const noexcept { return p.i * nz + p.j; }
  PixelIndex pixel_index(std::size_t n) const noexcept { return {n / nz, n % nz}; }
  double x_at(std::size_t i) const noexcept { return origin_x + static_cast<double>(i) * pitch_x; }
  double z_at(std::size_t j) const noexcept { return origin_z + static_cast<double>(j) * pitch_z; }
  /// Pixel center of flat index n.
  Point3 position(std::size_t n) const noexcept {
    const auto p = pixel_index(n);
    return {x_at(p.i), 0.0, z_at(p.j)};
  }
  /// Closest pixel center to p (clamped to the grid).
  Point3 nearest_node(const Point3& p) const noexcept {
    const double fi = std::clamp(std::round((p.x - origin_x) / pitch_x), 0.0, static_cast<double>(nx - 1));
    const double fj = std::clamp(std::round((p.z - origin_z) / pitch_z), 0.0, static_cast<double>(nz - 1));
    return {x_at(static_cast<std::size_t>(fi)), 0.0, z_at(static_cast<std::size_t>(fj))};
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Linear array, imaging grid and temporal sampling.
struct AcquisitionGeometry {
  std::vector<Point3> sensor_positions;
  GridSpec grid;
  double speed_of_sound = 1540.0;
  double sampling_frequency = 10e6;
  std::size_t num_samples = 1;
  /// First recorded sample, counted from the emission time origin. Subtracted
  /// from every time of flight; 0 means the recording starts at emission time.
  std::int64_t receive_offset = 0;

  std::size_t num_sensors() const noexcept { return sensor_positions.size(); }
  std::size_t num_pixels() const noexcept { return grid.num_pixels(); }

  /// Throws InvalidInput when an invariant is violated.
  void validate() const;

  /// 64-bit digest of every field; identical geometries give identical values.
  std::uint64_t fingerprint() const;
};

/// `count` sensors at (x, 0, 0), `pitch` apart, centered on `center_x`.
std::vector<Point3> linear_array(std::size_t count, double pitch, double center_x = 0.0);

/// Integer time of flight in samples, rounded half away from zero and clamped to >= 1.
std::int64_t compute_delay(const Point3& sensor, const Point3& source, double speed_of_sound,
                           double sampling_frequency);

/// Delay from `source` to sensor m as seen in the recorded window: compute_delay minus the
/// receive offset. May be < 1 for sources whose wavefront arrives before the window.
std::int64_t window_delay(const AcquisitionGeometry& geom, std::size_t sensor, const Point3& source);

/// Sample delays for every sensor/pixel pair, row-major N_m x N.
struct DelayTable {
  std::size_t num_sensors = 0;
  std::size_t num_pixels = 0;
  std::vector<std::int64_t> delays;
  std::uint64_t geometry_fingerprint = 0;
  /// Pairs whose delay exceeds the window length; they never contribute.
  std::size_t out_of_window = 0;

  std::int64_t at(std::size_t m, std::size_t n) const noexcept { return delays[m * num_pixels + n]; }
};

DelayTable build_delay_table(const AcquisitionGeometry& geom);

}  // namespace pam
