#include <cmath>
#include <string>

#include "pam/error.hpp"
#include "pam/solvers.hpp"

namespace pam {

std::vector<double> soft_threshold(std::span<const double> v, double tau) {
  std::vector<double> out(v.begin(), v.end());
  soft_threshold_inplace(out, tau);
  return out;
}

void soft_threshold_inplace(std::span<double> v, double tau) {
  if (!(tau >= 0)) throw InvalidInput("soft_threshold: tau must be >= 0");
  for (double& e : v) {
    const double mag = std::abs(e) - tau;
    e = mag > 0 ? std::copysign(mag, e) : 0.0;
  }
}

void diff_flat(std::size_t nx, std::size_t nz, std::size_t nt, std::span<const double> x, std::span<double> d) {
  const std::size_t size = nx * nz * nt;
  if (x.size() != size || d.size() != 3 * size) throw InvalidInput("apply_diff: shape mismatch");
  double* lat = d.data();
  double* ax = d.data() + size;
  double* tmp = d.data() + 2 * size;
  const std::size_t si = nz * nt;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < nz; ++j) {
      const std::size_t base = i * si + j * nt;
      for (std::size_t k = 0; k < nt; ++k) {
        const std::size_t idx = base + k;
        const double v = x[idx];
        lat[idx] = i + 1 < nx ? x[idx + si] - v : 0.0;
        ax[idx] = j + 1 < nz ? x[idx + nt] - v : 0.0;
        tmp[idx] = k + 1 < nt ? x[idx + 1] - v : 0.0;
      }
    }
  }
}

void diff_adjoint_flat(std::size_t nx, std::size_t nz, std::size_t nt, std::span<const double> d,
                       std::span<double> x) {
  const std::size_t size = nx * nz * nt;
  if (x.size() != size || d.size() != 3 * size) throw InvalidInput("apply_diff_adjoint: shape mismatch");
  const double* lat = d.data();
  const double* ax = d.data() + size;
  const double* tmp = d.data() + 2 * size;
  const std::size_t si = nz * nt;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < nz; ++j) {
      const std::size_t base = i * si + j * nt;
      for (std::size_t k = 0; k < nt; ++k) {
        const std::size_t idx = base + k;
        double acc = 0.0;
        if (i + 1 < nx) acc -= lat[idx];
        if (i > 0) acc += lat[idx - si];
        if (j + 1 < nz) acc -= ax[idx];
        if (j > 0) acc += ax[idx - nt];
        if (k + 1 < nt) acc -= tmp[idx];
        if (k > 0) acc += tmp[idx - 1];
        x[idx] = acc;
      }
    }
  }
}

DiffField apply_diff(const SourceCube& x) {
  const std::size_t size = x.size();
  std::vector<double> stacked(3 * size);
  diff_flat(x.nx(), x.nz(), x.nt(), x.flat(), stacked);
  DiffField d;
  d.nx = x.nx();
  d.nz = x.nz();
  d.nt = x.nt();
  d.lateral.assign(stacked.begin(), stacked.begin() + static_cast<std::ptrdiff_t>(size));
  d.axial.assign(stacked.begin() + static_cast<std::ptrdiff_t>(size),
                 stacked.begin() + static_cast<std::ptrdiff_t>(2 * size));
  d.temporal.assign(stacked.begin() + static_cast<std::ptrdiff_t>(2 * size), stacked.end());
  return d;
}

SourceCube apply_diff_adjoint(const DiffField& d) {
  const std::size_t size = d.nx * d.nz * d.nt;
  if (d.lateral.size() != size || d.axial.size() != size || d.temporal.size() != size) {
    throw InvalidInput("apply_diff_adjoint: component sizes do not match the declared shape");
  }
  std::vector<double> stacked;
  stacked.reserve(3 * size);
  stacked.insert(stacked.end(), d.lateral.begin(), d.lateral.end());
  stacked.insert(stacked.end(), d.axial.begin(), d.axial.end());
  stacked.insert(stacked.end(), d.temporal.begin(), d.temporal.end());
  SourceCube x(d.nx, d.nz, d.nt);
  diff_adjoint_flat(d.nx, d.nz, d.nt, stacked, x.flat());
  return x;
}

double total_variation(const SourceCube& x) {
  std::vector<double> d(3 * x.size());
  diff_flat(x.nx(), x.nz(), x.nt(), x.flat(), d);
  double s = 0.0;
  for (double v : d) s += std::abs(v);
  return s;
}

}  // namespace pam
