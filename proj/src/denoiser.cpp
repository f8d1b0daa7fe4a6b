#include <algorithm>
#include <cmath>
#include <string>

#include "pam/error.hpp"
#include "pam/solvers.hpp"

namespace pam {
namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
    const double v = std::exp(-0.5 * static_cast<double>(t * t) / (sigma * sigma));
    w[static_cast<std::size_t>(t + radius)] = v;
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

// Convolve every line along one axis. `len` samples per line, `stride` between samples,
// lines enumerated by (outer, inner) with the given strides.
void smooth_axis(std::vector<double>& data, const std::vector<double>& kernel, std::size_t len, std::size_t stride,
                 std::size_t outer, std::size_t outer_stride, std::size_t inner, std::size_t inner_stride) {
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto last = static_cast<std::ptrdiff_t>(len) - 1;
  std::vector<double> line(len);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * outer_stride + in * inner_stride;
      for (std::size_t s = 0; s < len; ++s) line[s] = data[base + s * stride];
      for (std::ptrdiff_t s = 0; s <= last; ++s) {
        double acc = 0.0;
        for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
          const std::ptrdiff_t src = std::clamp<std::ptrdiff_t>(s + t, 0, last);
          acc += kernel[static_cast<std::size_t>(t + radius)] * line[static_cast<std::size_t>(src)];
        }
        data[base + static_cast<std::size_t>(s) * stride] = acc;
      }
    }
  }
}

}  // namespace

SourceCube gaussian_smooth(const SourceCube& x, double sigma_lateral, double sigma_axial, double sigma_temporal) {
  for (double s : {sigma_lateral, sigma_axial, sigma_temporal}) {
    if (!(s >= 0) || !std::isfinite(s)) throw InvalidInput("gaussian_smooth: sigma must be finite and >= 0");
  }
  const std::size_t nx = x.nx(), nz = x.nz(), nt = x.nt();
  std::vector<double> data(x.flat().begin(), x.flat().end());
  if (sigma_lateral > 0 && nx > 1) smooth_axis(data, gaussian_kernel(sigma_lateral), nx, nz * nt, 1, 0, nz * nt, 1);
  if (sigma_axial > 0 && nz > 1) smooth_axis(data, gaussian_kernel(sigma_axial), nz, nt, nx, nz * nt, nt, 1);
  if (sigma_temporal > 0 && nt > 1) smooth_axis(data, gaussian_kernel(sigma_temporal), nt, 1, nx * nz, nt, 1, 0);
  return SourceCube(nx, nz, nt, std::move(data));
}

SourceCube default_denoiser(const SourceCube& x, double strength) {
  if (!(strength > 0)) throw InvalidInput("default_denoiser: strength must be > 0");
  return gaussian_smooth(x, strength, strength, strength);
}

Denoiser gaussian_denoiser(double strength) {
  if (!(strength > 0)) throw InvalidInput("gaussian_denoiser: strength must be > 0");
  return {"gaussian(sigma=" + std::to_string(strength) + ")",
          [strength](const SourceCube& x) { return default_denoiser(x, strength); }};
}

Denoiser gaussian_denoiser(double sigma_lateral, double sigma_axial, double sigma_temporal) {
  return {"gaussian(sigma=" + std::to_string(sigma_lateral) + "," + std::to_string(sigma_axial) + "," +
              std::to_string(sigma_temporal) + ")",
          [=](const SourceCube& x) { return gaussian_smooth(x, sigma_lateral, sigma_axial, sigma_temporal); }};
}

Denoiser identity_denoiser() {
  return {"identity", [](const SourceCube& x) { return x; }};
}

}  // namespace pam
