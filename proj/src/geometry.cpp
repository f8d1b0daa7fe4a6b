#include "pam/geometry.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "pam/checksum.hpp"
#include "pam/error.hpp"

namespace pam {
namespace {

bool finite(const Point3& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput("acquisition geometry: " + what);
}

class ByteWriter {
 public:
  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) bytes_.push_back(static_cast<std::byte>((v >> (8 * b)) & 0xFF));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  std::span<const std::byte> bytes() const { return bytes_; }

 private:
  std::vector<std::byte> bytes_;
};

}  // namespace

void AcquisitionGeometry::validate() const {
  require(!sensor_positions.empty(), "at least one sensor required");
  for (const auto& s : sensor_positions) require(finite(s), "non-finite sensor position");
  require(grid.nx >= 1 && grid.nz >= 1, "grid must have at least one pixel per axis");
  require(num_samples >= 1, "num_samples must be >= 1");
  require(std::isfinite(speed_of_sound) && speed_of_sound > 0, "speed of sound must be > 0");
  require(std::isfinite(sampling_frequency) && sampling_frequency > 0,
          "sampling frequency must be > 0");
  require(std::isfinite(grid.pitch_x) && grid.pitch_x > 0, "lateral pitch must be > 0");
  require(std::isfinite(grid.pitch_z) && grid.pitch_z > 0, "axial pitch must be > 0");
  require(std::isfinite(grid.origin_x) && std::isfinite(grid.origin_z), "non-finite grid origin");
  // z grows with j, so the first row is the shallowest.
  require(grid.origin_z > 0, "grid must lie strictly below the probe (z > 0)");
  require(receive_offset >= 0, "receive offset must be >= 0");
}

std::uint64_t AcquisitionGeometry::fingerprint() const {
  ByteWriter w;
  w.u64(sensor_positions.size());
  for (const auto& s : sensor_positions) {
    w.f64(s.x);
    w.f64(s.y);
    w.f64(s.z);
  }
  w.f64(grid.origin_x);
  w.f64(grid.origin_z);
  w.f64(grid.pitch_x);
  w.f64(grid.pitch_z);
  w.u64(grid.nx);
  w.u64(grid.nz);
  w.f64(speed_of_sound);
  w.f64(sampling_frequency);
  w.u64(num_samples);
  w.i64(receive_offset);
  return digest64(w.bytes());
}

std::vector<Point3> linear_array(std::size_t count, double pitch, double center_x) {
  std::vector<Point3> out(count);
  const double first = center_x - 0.5 * pitch * static_cast<double>(count - 1);
  for (std::size_t m = 0; m < count; ++m) out[m] = {first + pitch * static_cast<double>(m), 0.0, 0.0};
  return out;
}

std::int64_t compute_delay(const Point3& sensor, const Point3& source, double speed_of_sound,
                           double sampling_frequency) {
  if (!finite(sensor) || !finite(source)) throw InvalidInput("compute_delay: non-finite coordinates");
  if (!(speed_of_sound > 0) || !(sampling_frequency > 0)) {
    throw InvalidInput("compute_delay: speed of sound and sampling frequency must be > 0");
  }
  const double dist = std::hypot(sensor.x - source.x, sensor.y - source.y, sensor.z - source.z);
  // std::round rounds halfway cases away from zero.
  const auto samples = static_cast<std::int64_t>(std::round(dist / speed_of_sound * sampling_frequency));
  return samples < 1 ? 1 : samples;
}

std::int64_t window_delay(const AcquisitionGeometry& geom, std::size_t sensor, const Point3& source) {
  return compute_delay(geom.sensor_positions[sensor], source, geom.speed_of_sound,
                       geom.sampling_frequency) -
         geom.receive_offset;
}

DelayTable build_delay_table(const AcquisitionGeometry& geom) {
  geom.validate();
  DelayTable table;
  table.num_sensors = geom.num_sensors();
  table.num_pixels = geom.num_pixels();
  table.geometry_fingerprint = geom.fingerprint();
  table.delays.resize(table.num_sensors * table.num_pixels);

  const auto nt = static_cast<std::int64_t>(geom.num_samples);
  for (std::size_t m = 0; m < table.num_sensors; ++m) {
    for (std::size_t n = 0; n < table.num_pixels; ++n) {
      const std::int64_t d = window_delay(geom, m, geom.grid.position(n));
      if (d < 1) {
        throw InvalidInput("acquisition geometry: receive offset " + std::to_string(geom.receive_offset) +
                           " exceeds the time of flight of pixel " + std::to_string(n) + " to sensor " +
                           std::to_string(m));
      }
      if (d > nt) ++table.out_of_window;
      table.delays[m * table.num_pixels + n] = d;
    }
  }
  return table;
}

}  // namespace pam
