#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pam/error.hpp"
#include "pam/forward_operator.hpp"
#include "pam/tensor.hpp"

namespace pam {

// ---------------------------------------------------------------------------
// Proximal and finite-difference building blocks

/// Elementwise sign(v) * max(|v| - tau, 0).
std::vector<double> soft_threshold(std::span<const double> v, double tau);
void soft_threshold_inplace(std::span<double> v, double tau);

/// Forward differences of a cube along lateral (i), axial (j) and temporal (k) axes.
/// The last slice of each component is zero (replicate boundary), so constant cubes
/// have zero total variation. Each component has the cube's shape and layout.
struct DiffField {
  std::size_t nx = 0, nz = 0, nt = 0;
  std::vector<double> lateral;
  std::vector<double> axial;
  std::vector<double> temporal;
};

DiffField apply_diff(const SourceCube& x);
SourceCube apply_diff_adjoint(const DiffField& d);

/// Flat variants used inside the solvers: `d` holds the three components back to back.
void diff_flat(std::size_t nx, std::size_t nz, std::size_t nt, std::span<const double> x, std::span<double> d);
void diff_adjoint_flat(std::size_t nx, std::size_t nz, std::size_t nt, std::span<const double> d,
                       std::span<double> x);

/// ||D x||_1.
double total_variation(const SourceCube& x);

// ---------------------------------------------------------------------------
// Denoisers for regularization by denoising

/// Shape-preserving map f used by the ReD prior R(x) = 1/2 x^T (x - f(x)).
struct Denoiser {
  std::string name;
  std::function<SourceCube(const SourceCube&)> apply;

  SourceCube operator()(const SourceCube& x) const { return apply(x); }
};

/// Separable Gaussian smoothing with the given standard deviations (pixels, pixels, samples).
/// Kernels are truncated at 3 sigma and renormalised; borders replicate the edge value.
/// A sigma of 0 leaves that axis untouched.
SourceCube gaussian_smooth(const SourceCube& x, double sigma_lateral, double sigma_axial, double sigma_temporal);

/// Gaussian smoothing with the same sigma on every axis. strength > 0.
SourceCube default_denoiser(const SourceCube& x, double strength);

Denoiser gaussian_denoiser(double strength);
Denoiser gaussian_denoiser(double sigma_lateral, double sigma_axial, double sigma_temporal);
Denoiser identity_denoiser();

// ---------------------------------------------------------------------------
// Power map

/// X[i, j] = sum_k x[i, j, k]^2.
PowerMap power_map(const SourceCube& x, const GridSpec& grid);
PowerMap power_map(const SourceCube& x);

// ---------------------------------------------------------------------------
// Regularized inversion

struct SolverConfig {
  double lambda = 0.0;  ///< l1 weight
  double gamma = 0.0;   ///< TV weight
  double mu = 0.0;      ///< ReD weight
  double rho = 1.0;     ///< ADMM penalty
  std::size_t max_iterations = 300;
  double tolerance = 1e-5;  ///< relative iterate change (and ADMM relative residuals)
  std::size_t inner_cg_iterations = 50;
  double inner_cg_tolerance = 1e-6;
  std::size_t fixed_point_iterations = 3;  ///< ReD x-update passes per outer iteration
  double fixed_point_tolerance = 1e-4;
  std::size_t power_iterations = 100;  ///< for the Lipschitz estimate when none is given
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0;
  double objective = 0.0;
  double primal_residual = 0.0;  ///< ADMM only; relative iterate change for FISTA
  double dual_residual = 0.0;    ///< ADMM only
};

/// Divergence raised by a solver, carrying the iterations completed before it.
class DivergedSolve : public SolverDivergence {
 public:
  DivergedSolve(const SolverDivergence& cause, std::vector<IterationRecord> trace)
      : SolverDivergence(cause.iteration(), cause.detail()), trace_(std::move(trace)) {}

  const std::vector<IterationRecord>& trace() const noexcept { return trace_; }

 private:
  std::vector<IterationRecord> trace_;
};

struct SolveReport {
  SourceCube estimate;
  std::vector<IterationRecord> trace;  ///< one record per iteration
  std::size_t iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
  double lipschitz = 0.0;            ///< FISTA step constant actually used
  std::size_t restarts = 0;          ///< FISTA momentum restarts
  bool fixed_point_stalled = false;  ///< ReD inner loop made no progress for 10 passes
};

/// Largest |A^T y|; the smallest l1 weight for which the lasso solution is zero.
double lambda_max(const DelayOperator& op, const RfFrame& y);

/// Sp: min 1/2 ||y - A x||^2 + lambda ||x||_1 by FISTA with adaptive restart.
/// `lipschitz` must upper-bound ||A||^2; it is doubled if a plain proximal step fails to descend.
SolveReport fista_solve(const DelayOperator& op, const RfFrame& y, const SolverConfig& cfg, double lipschitz);
/// As above, estimating the Lipschitz constant by power iteration (with a 1% margin).
SolveReport fista_solve(const DelayOperator& op, const RfFrame& y, const SolverConfig& cfg);

/// SpTV: min 1/2 ||y - A x||^2 + lambda ||x||_1 + gamma ||D x||_1 by scaled ADMM.
SolveReport admm_sptv_solve(const DelayOperator& op, const RfFrame& y, const SolverConfig& cfg);

/// SpReD: min 1/2 ||y - A x||^2 + lambda ||x||_1 + mu/2 x^T (x - f(x)) by scaled ADMM.
SolveReport admm_spred_solve(const DelayOperator& op, const RfFrame& y, const SolverConfig& cfg,
                             const Denoiser& denoiser);

/// Objective values, evaluated directly.
double lasso_objective(const DelayOperator& op, const RfFrame& y, const SourceCube& x, double lambda);
double sptv_objective(const DelayOperator& op, const RfFrame& y, const SourceCube& x, double lambda, double gamma);
double spred_objective(const DelayOperator& op, const RfFrame& y, const SourceCube& x, double lambda, double mu,
                       const Denoiser& denoiser);

}  // namespace pam
