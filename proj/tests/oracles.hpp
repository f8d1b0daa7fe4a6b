#pragma once

// Slow, independent reference implementations used only by the tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pam/geometry.hpp"
#include "pam/random.hpp"
#include "pam/tensor.hpp"

namespace oracle {

/// Sample delay evaluated in long double, rounding half away from zero.
inline std::int64_t delay(const pam::Point3& a, const pam::Point3& b, long double c, long double fs) {
  const long double dx = static_cast<long double>(a.x) - b.x;
  const long double dy = static_cast<long double>(a.y) - b.y;
  const long double dz = static_cast<long double>(a.z) - b.z;
  const long double raw = std::sqrt(dx * dx + dy * dy + dz * dz) / c * fs;
  const long double r = raw < 0 ? -std::floor(-raw + 0.5L) : std::floor(raw + 0.5L);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(r));
}

inline std::vector<std::int64_t> delays(const pam::AcquisitionGeometry& g) {
  std::vector<std::int64_t> d(g.num_sensors() * g.num_pixels());
  for (std::size_t m = 0; m < g.num_sensors(); ++m) {
    for (std::size_t i = 0; i < g.grid.nx; ++i) {
      for (std::size_t j = 0; j < g.grid.nz; ++j) {
        const pam::Point3 p{g.grid.origin_x + static_cast<double>(i) * g.grid.pitch_x, 0.0,
                            g.grid.origin_z + static_cast<double>(j) * g.grid.pitch_z};
        d[m * g.num_pixels() + i * g.grid.nz + j] =
            delay(g.sensor_positions[m], p, g.speed_of_sound, g.sampling_frequency) - g.receive_offset;
      }
    }
  }
  return d;
}

/// Dense A built entry by entry from the block rule: block (m, n) has ones at (k + d - 1, k).
inline Eigen::MatrixXd dense_operator(const std::vector<std::int64_t>& d, std::size_t nm, std::size_t n,
                                      std::size_t nt) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nm * nt), static_cast<Eigen::Index>(n * nt));
  for (std::size_t m = 0; m < nm; ++m) {
    for (std::size_t p = 0; p < n; ++p) {
      const std::int64_t s = d[m * n + p];
      for (std::size_t row = 1; row <= nt; ++row) {
        for (std::size_t col = 1; col <= nt; ++col) {
          if (static_cast<std::int64_t>(row) == static_cast<std::int64_t>(col) + s - 1) {
            a(static_cast<Eigen::Index>(m * nt + row - 1), static_cast<Eigen::Index>(p * nt + col - 1)) = 1.0;
          }
        }
      }
    }
  }
  return a;
}

/// Naive time-exposure delay-and-sum.
inline std::vector<double> das(const pam::RfFrame& y, const std::vector<std::int64_t>& d, std::size_t n) {
  std::vector<double> out(n, 0.0);
  const std::size_t nm = y.num_sensors(), nt = y.nt();
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t k = 0; k < nt; ++k) {
      double s = 0.0;
      for (std::size_t m = 0; m < nm; ++m) {
        const std::int64_t idx = static_cast<std::int64_t>(k) + d[m * n + p] - 1;
        if (idx >= 0 && idx < static_cast<std::int64_t>(nt)) s += y(m, static_cast<std::size_t>(idx));
      }
      out[p] += s * s;
    }
  }
  return out;
}

/// Sum of |forward differences| over the three axes, written straight from the index ranges.
inline double tv(const pam::SourceCube& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.nx(); ++i) {
    for (std::size_t j = 0; j < x.nz(); ++j) {
      for (std::size_t k = 0; k < x.nt(); ++k) {
        if (i + 1 < x.nx()) s += std::abs(x(i + 1, j, k) - x(i, j, k));
        if (j + 1 < x.nz()) s += std::abs(x(i, j + 1, k) - x(i, j, k));
        if (k + 1 < x.nt()) s += std::abs(x(i, j, k + 1) - x(i, j, k));
      }
    }
  }
  return s;
}

/// Dense difference matrix with rows ordered (lateral block, axial block, temporal block).
inline Eigen::MatrixXd dense_diff(std::size_t nx, std::size_t nz, std::size_t nt) {
  const std::size_t n = nx * nz * nt;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(n));
  auto id = [&](std::size_t i, std::size_t j, std::size_t k) { return static_cast<Eigen::Index>((i * nz + j) * nt + k); };
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < nz; ++j) {
      for (std::size_t k = 0; k < nt; ++k) {
        const Eigen::Index r = id(i, j, k);
        if (i + 1 < nx) {
          d(r, id(i + 1, j, k)) += 1;
          d(r, r) -= 1;
        }
        if (j + 1 < nz) {
          d(static_cast<Eigen::Index>(n) + r, id(i, j + 1, k)) += 1;
          d(static_cast<Eigen::Index>(n) + r, r) -= 1;
        }
        if (k + 1 < nt) {
          d(static_cast<Eigen::Index>(2 * n) + r, id(i, j, k + 1)) += 1;
          d(static_cast<Eigen::Index>(2 * n) + r, r) -= 1;
        }
      }
    }
  }
  return d;
}

inline Eigen::VectorXd soft(const Eigen::VectorXd& v, double t) {
  return v.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
}

/// min 1/2 ||A x - y||^2 + lambda ||x||_1 + gamma ||D x||_1 by the Condat-Vu primal-dual iteration.
inline Eigen::VectorXd primal_dual(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Eigen::MatrixXd& d,
                                   double lambda, double gamma, int iterations) {
  const double lip = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
  const double dn = Eigen::JacobiSVD<Eigen::MatrixXd>(d).singularValues()(0);
  const double l = lip * lip;
  const double sigma = 1.0 / dn;
  const double tau = 0.9 / (l / 2.0 + sigma * dn * dn);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(a.cols());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(d.rows());
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd xn = soft(x - tau * (a.transpose() * (a * x - y) + d.transpose() * p), tau * lambda);
    p = (p + sigma * d * (2.0 * xn - x)).cwiseMax(-gamma).cwiseMin(gamma);
    x = xn;
  }
  return x;
}

/// Direct 1D convolution with a truncated, normalised Gaussian and replicate borders.
inline std::vector<double> gaussian_1d(const std::vector<double>& v, double sigma) {
  if (sigma == 0.0) return v;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> w(2 * r + 1);
  double s = 0.0;
  for (int t = -r; t <= r; ++t) s += w[t + r] = std::exp(-0.5 * t * t / (sigma * sigma));
  const int n = static_cast<int>(v.size());
  std::vector<double> out(v.size(), 0.0);
  for (int a = 0; a < n; ++a) {
    for (int t = -r; t <= r; ++t) out[a] += w[t + r] / s * v[std::clamp(a + t, 0, n - 1)];
  }
  return out;
}

inline std::vector<double> random_vector(std::size_t n, pam::Rng& rng) {
  std::vector<double> v(n);
  for (auto& e : v) e = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace oracle
