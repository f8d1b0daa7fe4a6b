#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pam/geometry.hpp"

namespace pam {

/// Spatiotemporal source amplitudes, N_x x N_z x N_t.
///
/// Flat layout is [x_1; ...; x_N] with x_n the N_t-sample waveform of pixel n
/// (see GridSpec for the pixel order), i.e. row-major (nx, nz, nt).
class SourceCube {
 public:
  SourceCube() = default;
  SourceCube(std::size_t nx, std::size_t nz, std::size_t nt);
  /// Takes ownership of a flat vector; throws InvalidInput on size mismatch or non-finite data.
  SourceCube(std::size_t nx, std::size_t nz, std::size_t nt, std::vector<double> flat);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t nz() const noexcept { return nz_; }
  std::size_t nt() const noexcept { return nt_; }
  std::size_t num_pixels() const noexcept { return nx_ * nz_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept {
    return data_[(i * nz_ + j) * nt_ + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return data_[(i * nz_ + j) * nt_ + k];
  }

  std::span<double> waveform(std::size_t n) noexcept { return {data_.data() + n * nt_, nt_}; }
  std::span<const double> waveform(std::size_t n) const noexcept { return {data_.data() + n * nt_, nt_}; }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }
  std::vector<double> release() && { return std::move(data_); }

  bool same_shape(const SourceCube& o) const noexcept { return nx_ == o.nx_ && nz_ == o.nz_ && nt_ == o.nt_; }

 private:
  std::size_t nx_ = 0, nz_ = 0, nt_ = 0;
  std::vector<double> data_;
};

struct NoiseInfo {
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

/// Recorded sensor signals, N_m x N_t, flat layout [y_1; ...; y_Nm].
class RfFrame {
 public:
  RfFrame() = default;
  RfFrame(std::size_t num_sensors, std::size_t nt);
  RfFrame(std::size_t num_sensors, std::size_t nt, std::vector<double> flat);

  std::size_t num_sensors() const noexcept { return nm_; }
  std::size_t nt() const noexcept { return nt_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t m, std::size_t k) noexcept { return data_[m * nt_ + k]; }
  double operator()(std::size_t m, std::size_t k) const noexcept { return data_[m * nt_ + k]; }

  std::span<double> trace(std::size_t m) noexcept { return {data_.data() + m * nt_, nt_}; }
  std::span<const double> trace(std::size_t m) const noexcept { return {data_.data() + m * nt_, nt_}; }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }

  /// Leading `samples` samples of every trace.
  RfFrame truncated(std::size_t samples) const;

  std::optional<NoiseInfo> noise;

 private:
  std::size_t nm_ = 0, nt_ = 0;
  std::vector<double> data_;
};

/// Temporally integrated power per pixel, N_x x N_z, same pixel order as GridSpec.
struct PowerMap {
  GridSpec grid;
  std::vector<double> values;

  PowerMap() = default;
  explicit PowerMap(const GridSpec& g) : grid(g), values(g.num_pixels(), 0.0) {}

  double& at(std::size_t i, std::size_t j) noexcept { return values[i * grid.nz + j]; }
  double at(std::size_t i, std::size_t j) const noexcept { return values[i * grid.nz + j]; }
  double at(PixelIndex p) const noexcept { return at(p.i, p.j); }

  double max_value() const noexcept;
  PixelIndex argmax() const noexcept;
};

/// Boolean pixel masks for the signal and noise zones (1 = member).
struct ZoneMasks {
  GridSpec grid;
  std::vector<std::uint8_t> signal;
  std::vector<std::uint8_t> noise;

  std::size_t signal_count() const noexcept;
  std::size_t noise_count() const noexcept;
  bool disjoint() const noexcept;
};

}  // namespace pam
