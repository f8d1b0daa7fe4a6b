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

namespace {

void check_shapes(const DelayOperator& op, const RfFrame& y) {
  if (y.num_sensors() != op.num_sensors() || y.nt() != op.num_samples()) {
    throw InvalidInput("solver: rf frame shape does not match the operator");
  }
}

SourceCube to_cube(const DelayOperator& op, const Vec& v) {
  return SourceCube(op.grid().nx, op.grid().nz, op.num_samples(), std::vector<double>(v.data(), v.data() + v.size()));
}

double ratio(double num, double den) { return den > 0 ? num / den : num; }

struct DiffOp {
  std::size_t nx, nz, nt;

  Vec apply(const Vec& x) const {
    Vec d(3 * x.size());
    diff_flat(nx, nz, nt, detail::span_of(x), detail::span_of(d));
    return d;
  }
  Vec adjoint(const Vec& d) const {
    Vec x(d.size() / 3);
    diff_adjoint_flat(nx, nz, nt, detail::span_of(d), detail::span_of(x));
    return x;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double sptv_objective(const DelayOperator& op, const RfFrame& y, const SourceCube& x, double lambda, double gamma) {
  return lasso_objective(op, y, x, lambda) + gamma * total_variation(x);
}

double spred_objective(const DelayOperator& op, const RfFrame& y, const SourceCube& x, double lambda, double mu,
                       const Denoiser& denoiser) {
  double reg = 0.0;
  if (mu != 0.0) {
    const SourceCube fx = denoiser(x);
    if (!fx.same_shape(x)) throw InvalidInput("denoiser changed the cube shape");
    const auto xv = detail::view(x.flat());
    reg = 0.5 * xv.dot(xv - detail::view(fx.flat()));
  }
  return lasso_objective(op, y, x, lambda) + mu * reg;
}

SolveReport admm_sptv_solve(const DelayOperator& op, const RfFrame& y, const SolverConfig& cfg) {
  cfg.validate();
  check_shapes(op, y);
  const auto t0 = std::chrono::steady_clock::now();

  const DiffOp D{op.grid().nx, op.grid().nz, op.num_samples()};
  const bool tv = cfg.gamma > 0;
  const double rho = cfg.rho;
  const auto n = static_cast<Eigen::Index>(op.cols());
  const Vec aty = detail::adjoint(op, detail::view(y.flat()));

  auto normal = [&](const Vec& v) {
    Vec out = detail::adjoint(op, detail::forward(op, v)) + rho * v;
    if (tv) out += rho * D.adjoint(D.apply(v));
    return out;
  };

  Vec x = Vec::Zero(n);
  Vec z1 = Vec::Zero(n), u1 = Vec::Zero(n);
  Vec z2, u2;
  if (tv) {
    z2 = Vec::Zero(3 * n);
    u2 = Vec::Zero(3 * n);
  }

  SolveReport report;
  try {
    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
      Vec rhs = aty + rho * (z1 - u1);
      if (tv) rhs += rho * D.adjoint(z2 - u2);
      detail::conjugate_gradient(normal, rhs, x, cfg.inner_cg_iterations, cfg.inner_cg_tolerance, it);

      const Vec z1_old = z1;
      z1 = x + u1;
      detail::soft(z1, cfg.lambda / rho);
      u1 += x - z1;

      double r2 = (x - z1).squaredNorm();
      double bx2 = x.squaredNorm();
      double zz2 = z1.squaredNorm();
      Vec dual = z1 - z1_old;
      Vec scaled_u = u1;
      if (tv) {
        const Vec dx = D.apply(x);
        const Vec z2_old = z2;
        z2 = dx + u2;
        detail::soft(z2, cfg.gamma / rho);
        u2 += dx - z2;
        r2 += (dx - z2).squaredNorm();
        bx2 += dx.squaredNorm();
        zz2 += z2.squaredNorm();
        dual += D.adjoint(z2 - z2_old);
        scaled_u += D.adjoint(u2);
      }

      const double primal = ratio(std::sqrt(r2), std::max(std::sqrt(bx2), std::sqrt(zz2)));
      const double dual_res = ratio(rho * dual.norm(), rho * scaled_u.norm());
      const SourceCube est = to_cube(op, z1);
      const double obj = tv ? sptv_objective(op, y, est, cfg.lambda, cfg.gamma)
                            : lasso_objective(op, y, est, cfg.lambda);
      if (!std::isfinite(obj) || !std::isfinite(primal) || !std::isfinite(dual_res)) {
        report.trace.push_back({it, obj, primal, dual_res});
        report.iterations = it;
        throw SolverDivergence(it, "ADMM iterate is not finite");
      }
      report.trace.push_back({it, obj, primal, dual_res});
      report.iterations = it;
      if (primal < cfg.tolerance && dual_res < cfg.tolerance) {
        report.converged = true;
        break;
      }
    }
  } catch (const SolverDivergence& e) {
    throw DivergedSolve(e, report.trace);
  }

  report.estimate = to_cube(op, z1);
  report.wall_seconds = seconds_since(t0);
  return report;
}

SolveReport admm_spred_solve(const DelayOperator& op, const RfFrame& y, const SolverConfig& cfg,
                             const Denoiser& denoiser) {
  cfg.validate();
  check_shapes(op, y);
  if (!denoiser.apply) throw InvalidInput("admm_spred_solve: denoiser is empty");
  const auto t0 = std::chrono::steady_clock::now();

  const double rho = cfg.rho;
  const double mu = cfg.mu;
  const auto n = static_cast<Eigen::Index>(op.cols());
  const Vec aty = detail::adjoint(op, detail::view(y.flat()));

  auto normal = [&](const Vec& v) { return Vec(detail::adjoint(op, detail::forward(op, v)) + (mu + rho) * v); };
  auto denoise = [&](const Vec& v) {
    const SourceCube out = denoiser(to_cube(op, v));
    if (out.size() != static_cast<std::size_t>(v.size())) throw InvalidInput("denoiser changed the cube shape");
    return Vec(detail::view(out.flat()));
  };

  Vec x = Vec::Zero(n);
  Vec z = Vec::Zero(n), u = Vec::Zero(n);

  SolveReport report;
  double best_change = std::numeric_limits<double>::infinity();
  std::size_t passes_without_progress = 0;

  try {
    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
      const Vec base = aty + rho * (z - u);
      for (std::size_t pass = 0; pass < cfg.fixed_point_iterations; ++pass) {
        const Vec x_prev = x;
        Vec rhs = base;
        if (mu != 0.0) rhs += mu * denoise(x_prev);
        detail::conjugate_gradient(normal, rhs, x, cfg.inner_cg_iterations, cfg.inner_cg_tolerance, it);
        const double change = ratio((x - x_prev).norm(), x.norm());
        if (change < best_change) {
          best_change = change;
          passes_without_progress = 0;
        } else if (++passes_without_progress >= 10) {
          report.fixed_point_stalled = true;
        }
        if (mu == 0.0 || change < cfg.fixed_point_tolerance) break;
      }
      best_change = std::numeric_limits<double>::infinity();

      const Vec z_old = z;
      z = x + u;
      detail::soft(z, cfg.lambda / rho);
      u += x - z;

      const double primal = ratio((x - z).norm(), std::max(x.norm(), z.norm()));
      const double dual_res = ratio(rho * (z - z_old).norm(), rho * u.norm());
      const double obj = spred_objective(op, y, to_cube(op, z), cfg.lambda, mu, denoiser);
      report.trace.push_back({it, obj, primal, dual_res});
      report.iterations = it;
      if (!std::isfinite(obj) || !std::isfinite(primal) || !std::isfinite(dual_res)) {
        throw SolverDivergence(it, "ADMM iterate is not finite");
      }
      if (primal < cfg.tolerance && dual_res < cfg.tolerance) {
        report.converged = true;
        break;
      }
    }
  } catch (const SolverDivergence& e) {
    throw DivergedSolve(e, report.trace);
  }

  report.estimate = to_cube(op, z);
  report.wall_seconds = seconds_since(t0);
  return report;
}

}  // namespace pam
