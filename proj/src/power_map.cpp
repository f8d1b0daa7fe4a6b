#include "pam/error.hpp"
#include "pam/solvers.hpp"

namespace pam {

PowerMap power_map(const SourceCube& x, const GridSpec& grid) {
  if (grid.nx != x.nx() || grid.nz != x.nz()) throw InvalidInput("power_map: grid does not match the cube");
  PowerMap map(grid);
  for (std::size_t n = 0; n < x.num_pixels(); ++n) {
    double s = 0.0;
    for (double v : x.waveform(n)) s += v * v;
    map.values[n] = s;
  }
  return map;
}

PowerMap power_map(const SourceCube& x) {
  GridSpec grid;
  grid.nx = x.nx();
  grid.nz = x.nz();
  return power_map(x, grid);
}

}  // namespace pam
