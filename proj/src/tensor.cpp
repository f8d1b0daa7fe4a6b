#include "pam/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pam/error.hpp"

namespace pam {
namespace {

void check_flat(const std::vector<double>& v, std::size_t expected, const char* what) {
  if (v.size() != expected) {
    throw InvalidInput(std::string(what) + ": expected " + std::to_string(expected) + " values, got " +
                       std::to_string(v.size()));
  }
  if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) {
    throw InvalidInput(std::string(what) + ": non-finite entry");
  }
}

}  // namespace

SourceCube::SourceCube(std::size_t nx, std::size_t nz, std::size_t nt)
    : nx_(nx), nz_(nz), nt_(nt), data_(nx * nz * nt, 0.0) {}

SourceCube::SourceCube(std::size_t nx, std::size_t nz, std::size_t nt, std::vector<double> flat)
    : nx_(nx), nz_(nz), nt_(nt), data_(std::move(flat)) {
  check_flat(data_, nx * nz * nt, "source cube");
}

RfFrame::RfFrame(std::size_t num_sensors, std::size_t nt)
    : nm_(num_sensors), nt_(nt), data_(num_sensors * nt, 0.0) {}

RfFrame::RfFrame(std::size_t num_sensors, std::size_t nt, std::vector<double> flat)
    : nm_(num_sensors), nt_(nt), data_(std::move(flat)) {
  check_flat(data_, num_sensors * nt, "rf frame");
}

RfFrame RfFrame::truncated(std::size_t samples) const {
  if (samples > nt_) throw InvalidInput("rf frame: cannot keep more samples than recorded");
  RfFrame out(nm_, samples);
  for (std::size_t m = 0; m < nm_; ++m) {
    std::copy_n(trace(m).begin(), samples, out.trace(m).begin());
  }
  out.noise = noise;
  return out;
}

double PowerMap::max_value() const noexcept {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

PixelIndex PowerMap::argmax() const noexcept {
  const auto it = std::max_element(values.begin(), values.end());
  return grid.pixel_index(static_cast<std::size_t>(it - values.begin()));
}

std::size_t ZoneMasks::signal_count() const noexcept {
  return static_cast<std::size_t>(std::count(signal.begin(), signal.end(), 1));
}

std::size_t ZoneMasks::noise_count() const noexcept {
  return static_cast<std::size_t>(std::count(noise.begin(), noise.end(), 1));
}

bool ZoneMasks::disjoint() const noexcept {
  for (std::size_t n = 0; n < signal.size() && n < noise.size(); ++n) {
    if (signal[n] && noise[n]) return false;
  }
  return true;
}

}  // namespace pam
