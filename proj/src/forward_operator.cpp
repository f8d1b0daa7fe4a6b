#include "pam/forward_operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pam/error.hpp"
#include "pam/random.hpp"

namespace pam {
namespace {

void check_size(std::size_t got, std::size_t expected, const char* what) {
  if (got != expected) {
    throw InvalidInput(std::string(what) + ": expected length " + std::to_string(expected) + ", got " +
                       std::to_string(got));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

DelayOperator::DelayOperator(DelayTable table, const GridSpec& grid, std::size_t num_samples)
    : table_(std::move(table)), grid_(grid), nt_(num_samples) {
  if (nt_ == 0) throw InvalidInput("delay operator: num_samples must be >= 1");
  if (table_.num_pixels != grid_.num_pixels()) throw InvalidInput("delay operator: table/grid size mismatch");
  if (table_.delays.size() != table_.num_sensors * table_.num_pixels) {
    throw InvalidInput("delay operator: malformed delay table");
  }
  if (std::any_of(table_.delays.begin(), table_.delays.end(), [](std::int64_t d) { return d < 1; })) {
    throw InvalidInput("delay operator: delays must be >= 1");
  }
}

DelayOperator::DelayOperator(const AcquisitionGeometry& geom)
    : DelayOperator(build_delay_table(geom), geom.grid, geom.num_samples) {}

// Block (m, n) adds x_n into y_m shifted by delta - 1 samples; the tail past N_t is dropped.
void DelayOperator::forward(std::span<const double> x, std::span<double> y) const {
  check_size(x.size(), cols(), "apply_forward");
  check_size(y.size(), rows(), "apply_forward");
  const std::size_t npix = num_pixels();
  const auto nt = static_cast<std::int64_t>(nt_);
#pragma omp parallel for schedule(static)
  for (std::size_t m = 0; m < num_sensors(); ++m) {
    double* ym = y.data() + m * nt_;
    std::fill(ym, ym + nt_, 0.0);
    const std::int64_t* dm = table_.delays.data() + m * npix;
    for (std::size_t n = 0; n < npix; ++n) {
      const std::int64_t shift = dm[n] - 1;
      const std::int64_t len = nt - shift;
      if (len <= 0) continue;
      const double* xn = x.data() + n * nt_;
      double* dst = ym + shift;
      for (std::int64_t k = 0; k < len; ++k) dst[k] += xn[k];
    }
  }
}

void DelayOperator::adjoint(std::span<const double> y, std::span<double> x) const {
  check_size(y.size(), rows(), "apply_adjoint");
  check_size(x.size(), cols(), "apply_adjoint");
  const std::size_t npix = num_pixels();
  const std::size_t nm = num_sensors();
  const auto nt = static_cast<std::int64_t>(nt_);
#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < npix; ++n) {
    double* xn = x.data() + n * nt_;
    std::fill(xn, xn + nt_, 0.0);
    for (std::size_t m = 0; m < nm; ++m) {
      const std::int64_t shift = table_.delays[m * npix + n] - 1;
      const std::int64_t len = nt - shift;
      if (len <= 0) continue;
      const double* src = y.data() + m * nt_ + shift;
      for (std::int64_t k = 0; k < len; ++k) xn[k] += src[k];
    }
  }
}

RfFrame DelayOperator::apply_forward(const SourceCube& x) const {
  if (x.nx() != grid_.nx || x.nz() != grid_.nz || x.nt() != nt_) {
    throw InvalidInput("apply_forward: source cube shape does not match the operator");
  }
  RfFrame y(num_sensors(), nt_);
  forward(x.flat(), y.flat());
  return y;
}

SourceCube DelayOperator::apply_adjoint(const RfFrame& y) const {
  if (y.num_sensors() != num_sensors() || y.nt() != nt_) {
    throw InvalidInput("apply_adjoint: rf frame shape does not match the operator");
  }
  SourceCube x(grid_.nx, grid_.nz, nt_);
  adjoint(y.flat(), x.flat());
  return x;
}

Eigen::MatrixXd materialize_dense(const DelayOperator& op, std::size_t max_entries) {
  const double entries = static_cast<double>(op.rows()) * static_cast<double>(op.cols());
  if (entries > static_cast<double>(max_entries)) {
    throw InvalidInput("materialize_dense: " + std::to_string(op.rows()) + " x " + std::to_string(op.cols()) +
                       " exceeds the dense safety bound of " + std::to_string(max_entries) + " entries");
  }
  const std::size_t nt = op.num_samples();
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(op.rows()),
                                                static_cast<Eigen::Index>(op.cols()));
  for (std::size_t m = 0; m < op.num_sensors(); ++m) {
    for (std::size_t n = 0; n < op.num_pixels(); ++n) {
      const auto d = static_cast<std::size_t>(op.table().at(m, n));
      for (std::size_t k2 = 0; k2 < nt; ++k2) {
        const std::size_t k1 = k2 + d - 1;
        if (k1 >= nt) break;
        dense(static_cast<Eigen::Index>(m * nt + k1), static_cast<Eigen::Index>(n * nt + k2)) = 1.0;
      }
    }
  }
  return dense;
}

double estimate_operator_norm(const DelayOperator& op, std::size_t iterations, std::uint64_t seed,
                              std::vector<double>* history) {
  if (iterations == 0) throw InvalidInput("estimate_operator_norm: iterations must be >= 1");
  Rng rng(seed);
  std::vector<double> v(op.cols());
  for (auto& e : v) e = rng.normal();
  std::vector<double> av(op.rows());
  std::vector<double> w(op.cols());

  double rayleigh = 0.0;
  if (history) history->clear();
  for (std::size_t it = 0; it < iterations; ++it) {
    const double norm = std::sqrt(dot(v, v));
    if (norm == 0.0) return 0.0;  // v fell into the null space; A is zero on it
    for (auto& e : v) e /= norm;
    op.forward(v, av);
    op.adjoint(av, w);
    // v is unit-norm, so <v, A^T A v> = ||A v||^2.
    rayleigh = dot(av, av);
    if (history) history->push_back(rayleigh);
    v.swap(w);
  }
  return rayleigh;
}

}  // namespace pam
