#include "pam/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pam/error.hpp"

namespace pam {
namespace {

constexpr char kMagic[4] = {'P', 'A', 'M', 'T'};

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    out.insert(out.end(), b, b + n);
  }
  template <class T>
  void le(T v) {
    const auto u = static_cast<std::uint64_t>(v);
    for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<std::byte>((u >> (8 * b)) & 0xFF));
  }
  std::vector<std::byte> out;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::byte>& b) : bytes_(b) {}

  template <class T>
  T le() {
    need(sizeof(T));
    std::uint64_t u = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) u |= std::to_integer<std::uint64_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError("tensor file: truncated");
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::byte* here() const { return bytes_.data() + pos_; }

 private:
  const std::vector<std::byte>& bytes_;
  std::size_t pos_ = 0;
};

void expect_dims(const Tensor& t, std::size_t ndim, Tensor::DType dtype, const char* what) {
  if (t.dims.size() != ndim || t.dtype != dtype) {
    throw IoError(std::string("tensor file does not hold a ") + what);
  }
}

}  // namespace

std::size_t Tensor::element_count() const noexcept {
  std::size_t n = 1;
  for (auto d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

std::vector<std::byte> encode_tensor(const Tensor& t) {
  const std::size_t count = t.element_count();
  if ((t.dtype == Tensor::DType::f64 && t.f64.size() != count) ||
      (t.dtype == Tensor::DType::i64 && t.i64.size() != count)) {
    throw InvalidInput("encode_tensor: payload does not match dims");
  }
  Writer w;
  w.raw(kMagic, 4);
  w.le<std::uint32_t>(kTensorVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) w.le<std::uint64_t>(d);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(t.dtype));
  w.out.reserve(w.out.size() + 8 * count);
  if (t.dtype == Tensor::DType::f64) {
    for (double v : t.f64) w.le<std::uint64_t>(std::bit_cast<std::uint64_t>(v));
  } else {
    for (auto v : t.i64) w.le<std::uint64_t>(static_cast<std::uint64_t>(v));
  }
  return std::move(w.out);
}

Tensor decode_tensor(const std::vector<std::byte>& bytes) {
  Reader r(bytes);
  r.need(4);
  if (std::memcmp(r.here(), kMagic, 4) != 0) throw IoError("tensor file: bad magic");
  for (int i = 0; i < 4; ++i) r.le<std::uint8_t>();
  const auto version = r.le<std::uint32_t>();
  if (version != kTensorVersion) throw IoError("tensor file: unsupported version " + std::to_string(version));
  const auto ndim = r.le<std::uint32_t>();
  if (ndim > 16) throw IoError("tensor file: implausible rank");
  Tensor t;
  for (std::uint32_t d = 0; d < ndim; ++d) t.dims.push_back(r.le<std::uint64_t>());
  const auto code = r.le<std::uint32_t>();
  if (code != 1 && code != 2) throw IoError("tensor file: unknown dtype " + std::to_string(code));
  t.dtype = static_cast<Tensor::DType>(code);
  const std::size_t count = t.element_count();
  if (r.remaining() != 8 * count) throw IoError("tensor file: payload size does not match dims");
  if (t.dtype == Tensor::DType::f64) {
    t.f64.resize(count);
    for (auto& v : t.f64) v = std::bit_cast<double>(r.le<std::uint64_t>());
  } else {
    t.i64.resize(count);
    for (auto& v : t.i64) v = static_cast<std::int64_t>(r.le<std::uint64_t>());
  }
  return t;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::byte>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

std::vector<std::byte> read_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) { write_bytes(path, encode_tensor(t)); }

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_bytes(path)); }

Tensor to_tensor(const SourceCube& x) {
  Tensor t;
  t.dims = {x.nx(), x.nz(), x.nt()};
  t.f64.assign(x.flat().begin(), x.flat().end());
  return t;
}

Tensor to_tensor(const RfFrame& y) {
  Tensor t;
  t.dims = {y.num_sensors(), y.nt()};
  t.f64.assign(y.flat().begin(), y.flat().end());
  return t;
}

Tensor to_tensor(const PowerMap& map) {
  Tensor t;
  t.dims = {map.grid.nx, map.grid.nz};
  t.f64 = map.values;
  return t;
}

Tensor to_tensor(const DelayTable& table) {
  Tensor t;
  t.dtype = Tensor::DType::i64;
  t.dims = {table.num_sensors, table.num_pixels};
  t.i64 = table.delays;
  return t;
}

SourceCube cube_from_tensor(const Tensor& t) {
  expect_dims(t, 3, Tensor::DType::f64, "source cube");
  try {
    return SourceCube(t.dims[0], t.dims[1], t.dims[2], t.f64);
  } catch (const InvalidInput& e) {
    throw IoError(e.what());
  }
}

RfFrame frame_from_tensor(const Tensor& t) {
  expect_dims(t, 2, Tensor::DType::f64, "rf frame");
  try {
    return RfFrame(t.dims[0], t.dims[1], t.f64);
  } catch (const InvalidInput& e) {
    throw IoError(e.what());
  }
}

PowerMap map_from_tensor(const Tensor& t, const GridSpec& grid) {
  expect_dims(t, 2, Tensor::DType::f64, "power map");
  if (t.dims[0] != grid.nx || t.dims[1] != grid.nz) throw IoError("power map file does not match the grid");
  for (double v : t.f64) {
    if (!std::isfinite(v) || v < 0) throw IoError("power map file has a negative or non-finite entry");
  }
  PowerMap map(grid);
  map.values = t.f64;
  return map;
}

PowerMap map_from_tensor(const Tensor& t) {
  expect_dims(t, 2, Tensor::DType::f64, "power map");
  GridSpec grid;
  grid.nx = t.dims[0];
  grid.nz = t.dims[1];
  return map_from_tensor(t, grid);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string map_to_csv(const PowerMap& map) {
  std::string out = "i,j,x_m,z_m,power\n";
  for (std::size_t i = 0; i < map.grid.nx; ++i) {
    for (std::size_t j = 0; j < map.grid.nz; ++j) {
      out += std::to_string(i) + "," + std::to_string(j) + "," + format_double(map.grid.x_at(i)) + "," +
             format_double(map.grid.z_at(j)) + "," + format_double(map.at(i, j)) + "\n";
    }
  }
  return out;
}

std::uint16_t render_level(double value, double peak, double dynamic_range_db) {
  if (!(peak > 0) || !(value > 0)) return 0;
  const double db = 10.0 * std::log10(value / peak);
  const double level = std::floor(65535.0 * std::max(0.0, 1.0 + db / dynamic_range_db) + 0.5);
  return static_cast<std::uint16_t>(std::clamp(level, 0.0, 65535.0));
}

std::vector<std::byte> render_pgm(const PowerMap& map, double dynamic_range_db) {
  if (!(dynamic_range_db > 0)) throw InvalidInput("render: dynamic range must be > 0 dB");
  const double peak = map.max_value();
  const std::string header =
      "P5\n" + std::to_string(map.grid.nx) + " " + std::to_string(map.grid.nz) + "\n65535\n";
  std::vector<std::byte> out;
  out.reserve(header.size() + 2 * map.values.size());
  for (char c : header) out.push_back(static_cast<std::byte>(c));
  for (std::size_t j = 0; j < map.grid.nz; ++j) {
    for (std::size_t i = 0; i < map.grid.nx; ++i) {
      const std::uint16_t v = render_level(map.at(i, j), peak, dynamic_range_db);
      out.push_back(static_cast<std::byte>(v >> 8));  // PGM samples are big-endian
      out.push_back(static_cast<std::byte>(v & 0xFF));
    }
  }
  return out;
}

}  // namespace pam
