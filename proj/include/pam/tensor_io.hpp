#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pam/geometry.hpp"
#include "pam/tensor.hpp"

namespace pam {

/// Binary tensor container.
///
///   bytes 0..3   "PAMT"
///   u32          version (1)
///   u32          ndim
///   u64 x ndim   dims
///   u32          dtype (1 = float64, 2 = int64)
///   payload      row-major, little-endian
struct Tensor {
  enum class DType : std::uint32_t { f64 = 1, i64 = 2 };

  std::vector<std::uint64_t> dims;
  DType dtype = DType::f64;
  std::vector<double> f64;
  std::vector<std::int64_t> i64;

  std::size_t element_count() const noexcept;
};

inline constexpr std::uint32_t kTensorVersion = 1;

std::vector<std::byte> encode_tensor(const Tensor& t);
Tensor decode_tensor(const std::vector<std::byte>& bytes);

/// Throw IoError on filesystem failures and on malformed files.
void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

Tensor to_tensor(const SourceCube& x);
Tensor to_tensor(const RfFrame& y);
Tensor to_tensor(const PowerMap& map);
Tensor to_tensor(const DelayTable& table);

SourceCube cube_from_tensor(const Tensor& t);
RfFrame frame_from_tensor(const Tensor& t);
/// Grid metadata is not stored in the file; pass the grid the map belongs to.
PowerMap map_from_tensor(const Tensor& t, const GridSpec& grid);
/// Unit-pitch grid of the tensor's shape.
PowerMap map_from_tensor(const Tensor& t);

/// Shortest round-trip text for a double ("%.17g").
std::string format_double(double v);

/// CSV with header i,j,x_m,z_m,power and one row per pixel.
std::string map_to_csv(const PowerMap& map);

/// 16-bit binary PGM, column index = lateral i, row index = axial j (depth increases downwards).
/// v = floor(65535 * max(0, 1 + dB / range) + 0.5), dB = 10 log10(X / max X); an all-zero map is black.
std::vector<std::byte> render_pgm(const PowerMap& map, double dynamic_range_db = 40.0);
std::uint16_t render_level(double value, double peak, double dynamic_range_db);

void write_bytes(const std::filesystem::path& path, const std::vector<std::byte>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
std::vector<std::byte> read_bytes(const std::filesystem::path& path);

}  // namespace pam
