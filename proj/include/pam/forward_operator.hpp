#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pam/geometry.hpp"
#include "pam/tensor.hpp"

namespace pam {

/// Matrix-free delay operator A : R^{N*N_t} -> R^{N_m*N_t}.
///
/// Block (m, n) of A is an N_t x N_t identity shifted down by delta_{m,n} - 1
/// rows; entries pushed past the last row are dropped. Every entry is 0 or 1.
class DelayOperator {
 public:
  DelayOperator(DelayTable table, const GridSpec& grid, std::size_t num_samples);
  explicit DelayOperator(const AcquisitionGeometry& geom);

  std::size_t num_sensors() const noexcept { return table_.num_sensors; }
  std::size_t num_pixels() const noexcept { return table_.num_pixels; }
  std::size_t num_samples() const noexcept { return nt_; }
  std::size_t rows() const noexcept { return num_sensors() * nt_; }
  std::size_t cols() const noexcept { return num_pixels() * nt_; }
  const DelayTable& table() const noexcept { return table_; }
  const GridSpec& grid() const noexcept { return grid_; }

  /// y = A x on flat vectors.
  void forward(std::span<const double> x, std::span<double> y) const;
  /// x = A^T y on flat vectors.
  void adjoint(std::span<const double> y, std::span<double> x) const;

  RfFrame apply_forward(const SourceCube& x) const;
  SourceCube apply_adjoint(const RfFrame& y) const;

 private:
  DelayTable table_;
  GridSpec grid_;
  std::size_t nt_;
};

inline constexpr std::size_t kDenseEntryLimit = 100'000'000;

/// Dense copy of A for small instances (test oracle). Throws InvalidInput above `max_entries`.
Eigen::MatrixXd materialize_dense(const DelayOperator& op, std::size_t max_entries = kDenseEntryLimit);

/// Power iteration on A^T A. Returns the Rayleigh quotient after `iterations` steps, an
/// estimate of ||A||_2^2. When `history` is non-null it receives the quotient of every step.
double estimate_operator_norm(const DelayOperator& op, std::size_t iterations, std::uint64_t seed,
                              std::vector<double>* history = nullptr);

}  // namespace pam
