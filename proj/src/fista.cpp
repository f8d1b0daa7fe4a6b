#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "pam/error.hpp"
#include "pam/solvers.hpp"
#include "solver_detail.hpp"

namespace pam {

using detail::Vec;

void SolverConfig::validate() const {
  auto weight = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0) throw ConfigError(name, "must be finite and >= 0");
  };
  weight(lambda, "lambda");
  weight(gamma, "gamma");
  weight(mu, "mu");
  if (!std::isfinite(rho) || rho <= 0) throw ConfigError("rho", "must be finite and > 0");
  if (max_iterations < 1) throw ConfigError("max_iterations", "must be >= 1");
  if (inner_cg_iterations < 1) throw ConfigError("inner_cg_iterations", "must be >= 1");
  if (fixed_point_iterations < 1) throw ConfigError("fixed_point_iterations", "must be >= 1");
  if (power_iterations < 1) throw ConfigError("power_iterations", "must be >= 1");
  if (!(tolerance > 0)) throw ConfigError("tolerance", "must be > 0");
  if (!(inner_cg_tolerance > 0)) throw ConfigError("inner_cg_tolerance", "must be > 0");
  if (!(fixed_point_tolerance > 0)) throw ConfigError("fixed_point_tolerance", "must be > 0");
}

double lambda_max(const DelayOperator& op, const RfFrame& y) {
  const Vec aty = detail::adjoint(op, detail::view(y.flat()));
  return aty.size() == 0 ? 0.0 : aty.lpNorm<Eigen::Infinity>();
}

double lasso_objective(const DelayOperator& op, const RfFrame& y, const SourceCube& x, double lambda) {
  const Vec r = detail::forward(op, detail::view(x.flat())) - detail::view(y.flat());
  return 0.5 * r.squaredNorm() + lambda * detail::view(x.flat()).lpNorm<1>();
}

namespace {

void check_shapes(const DelayOperator& op, const RfFrame& y) {
  if (y.num_sensors() != op.num_sensors() || y.nt() != op.num_samples()) {
    throw InvalidInput("solver: rf frame shape does not match the operator");
  }
}

// Ratio of objective increase treated as rounding noise rather than a failed step.
constexpr double kRoundingSlack = 1e-13;

bool rounding_level(double increase, double reference) {
  return increase <= kRoundingSlack * std::max(1.0, std::abs(reference));
}

}  // namespace

SolveReport fista_solve(const DelayOperator& op, const RfFrame& y, const SolverConfig& cfg, double lipschitz) {
  cfg.validate();
  check_shapes(op, y);
  if (!(lipschitz > 0) || !std::isfinite(lipschitz)) throw ConfigError("lipschitz", "must be finite and > 0");
  const auto t0 = std::chrono::steady_clock::now();

  const auto yv = detail::view(y.flat());
  const auto n = static_cast<Eigen::Index>(op.cols());
  const double lambda = cfg.lambda;
  double L = lipschitz;

  Vec x = Vec::Zero(n);
  Vec ax = Vec::Zero(yv.size());
  Vec z = x;
  Vec az = ax;
  double t = 1.0;
  double obj = 0.5 * yv.squaredNorm();

  auto objective = [&](const Vec& v, const Vec& av) { return 0.5 * (av - yv).squaredNorm() + lambda * v.lpNorm<1>(); };

  SolveReport report;
  try {
    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
      bool momentum = t > 1.0;
      Vec x_new, ax_new;
      double obj_new = 0.0;
      bool stalled = false;
      std::size_t doublings = 0;
      for (;;) {
        x_new = z - detail::adjoint(op, az - yv) / L;
        detail::soft(x_new, lambda / L);
        ax_new = detail::forward(op, x_new);
        obj_new = objective(x_new, ax_new);
        if (!std::isfinite(obj_new)) throw SolverDivergence(it, "objective is not finite");
        if (obj_new <= obj) break;
        if (momentum) {
          // Drop the momentum and retry from the current iterate.
          z = x;
          az = ax;
          t = 1.0;
          momentum = false;
          ++report.restarts;
          continue;
        }
        if (rounding_level(obj_new - obj, obj)) {
          stalled = true;
          break;
        }
        if (++doublings > 60) throw SolverDivergence(it, "no descent even with a tiny step");
        L *= 2.0;
      }

      if (stalled) {
        report.trace.push_back({it, obj, 0.0, 0.0});
        report.iterations = it;
        report.converged = true;
        break;
      }

      const double dx = (x_new - x).norm();
      const double xn = x_new.norm();
      const double rel = xn > 0 ? dx / xn : (dx > 0 ? 1.0 : 0.0);

      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double beta = (t - 1.0) / t_new;
      z = x_new + beta * (x_new - x);
      az = ax_new + beta * (ax_new - ax);
      x.swap(x_new);
      ax.swap(ax_new);
      t = t_new;
      obj = obj_new;

      report.trace.push_back({it, obj, rel, 0.0});
      report.iterations = it;
      if (rel < cfg.tolerance) {
        report.converged = true;
        break;
      }
    }
  } catch (const SolverDivergence& e) {
    throw DivergedSolve(e, report.trace);
  }

  report.lipschitz = L;
  report.estimate = SourceCube(op.grid().nx, op.grid().nz, op.num_samples(),
                               std::vector<double>(x.data(), x.data() + x.size()));
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

SolveReport fista_solve(const DelayOperator& op, const RfFrame& y, const SolverConfig& cfg) {
  cfg.validate();
  const double L = estimate_operator_norm(op, cfg.power_iterations, cfg.seed);
  if (!(L > 0)) throw ConfigError("lipschitz", "operator norm estimate is zero");
  return fista_solve(op, y, cfg, 1.01 * L);
}

}  // namespace pam
