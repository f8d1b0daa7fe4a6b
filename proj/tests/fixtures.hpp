#pragma once

#include "pam/geometry.hpp"
#include "pam/random.hpp"
#include "pam/tensor.hpp"

namespace fixture {

/// The 3 x 5 pixel, 3 sensor, 10 sample toy instance.
inline pam::AcquisitionGeometry toy() {
  pam::AcquisitionGeometry g;
  g.sensor_positions = pam::linear_array(3, 0.6e-3);
  g.grid = {-0.2e-3, 0.2e-3, 0.2e-3, 0.2e-3, 3, 5};
  g.speed_of_sound = 1540.0;
  g.sampling_frequency = 10e6;
  g.num_samples = 10;
  return g;
}

/// Small random geometry: up to 6 x 8 pixels, N_t <= 16, N_m <= 4.
inline pam::AcquisitionGeometry random_small(pam::Rng& rng) {
  pam::AcquisitionGeometry g;
  const auto nm = static_cast<std::size_t>(rng.uniform_int(1, 4));
  g.sensor_positions = pam::linear_array(nm, rng.uniform(0.1e-3, 0.5e-3), rng.uniform(-0.2e-3, 0.2e-3));
  g.grid.nx = static_cast<std::size_t>(rng.uniform_int(1, 6));
  g.grid.nz = static_cast<std::size_t>(rng.uniform_int(1, 8));
  g.grid.pitch_x = rng.uniform(0.05e-3, 0.3e-3);
  g.grid.pitch_z = rng.uniform(0.05e-3, 0.3e-3);
  g.grid.origin_x = rng.uniform(-0.5e-3, 0.0);
  g.grid.origin_z = rng.uniform(0.1e-3, 0.6e-3);
  g.speed_of_sound = 1540.0;
  g.sampling_frequency = 10e6;
  g.num_samples = static_cast<std::size_t>(rng.uniform_int(4, 16));
  return g;
}

inline pam::SourceCube random_cube(std::size_t nx, std::size_t nz, std::size_t nt, pam::Rng& rng) {
  pam::SourceCube x(nx, nz, nt);
  for (auto& v : x.flat()) v = rng.uniform(-1.0, 1.0);
  return x;
}

inline pam::RfFrame random_frame(std::size_t nm, std::size_t nt, pam::Rng& rng) {
  pam::RfFrame y(nm, nt);
  for (auto& v : y.flat()) v = rng.uniform(-1.0, 1.0);
  return y;
}

}  // namespace fixture
