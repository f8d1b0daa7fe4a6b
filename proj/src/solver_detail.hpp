#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>

#include "pam/error.hpp"
#include "pam/forward_operator.hpp"

namespace pam::detail {

using Vec = Eigen::VectorXd;

inline Eigen::Map<const Vec> view(std::span<const double> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

inline std::span<const double> span_of(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<double> span_of(Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

inline Vec forward(const DelayOperator& op, const Vec& x) {
  Vec y(static_cast<Eigen::Index>(op.rows()));
  op.forward(span_of(x), span_of(y));
  return y;
}

inline Vec adjoint(const DelayOperator& op, const Vec& y) {
  Vec x(static_cast<Eigen::Index>(op.cols()));
  op.adjoint(span_of(y), span_of(x));
  return x;
}

struct CgResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Conjugate gradient for a symmetric positive definite `apply`, warm-started from x.
/// `outer` is the caller's iteration index, reported if the recursion turns non-finite.
template <class Apply>
CgResult conjugate_gradient(const Apply& apply, const Vec& b, Vec& x, std::size_t max_iterations, double tolerance,
                            std::size_t outer) {
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    return {};
  }
  Vec r = b - apply(x);
  Vec p = r;
  double rr = r.squaredNorm();
  CgResult res{0, std::sqrt(rr) / bnorm};
  while (res.iterations < max_iterations && res.relative_residual > tolerance) {
    const Vec q = apply(p);
    const double pq = p.dot(q);
    if (!std::isfinite(pq) || pq <= 0.0) {
      if (rr == 0.0) break;
      throw SolverDivergence(outer, "conjugate gradient curvature is " + std::to_string(pq));
    }
    const double alpha = rr / pq;
    x += alpha * p;
    r -= alpha * q;
    const double rr_next = r.squaredNorm();
    if (!std::isfinite(rr_next)) throw SolverDivergence(outer, "conjugate gradient residual is not finite");
    p = r + (rr_next / rr) * p;
    rr = rr_next;
    ++res.iterations;
    res.relative_residual = std::sqrt(rr) / bnorm;
  }
  return res;
}

inline void soft(Vec& v, double tau) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - tau;
    v[i] = mag > 0 ? std::copysign(mag, v[i]) : 0.0;
  }
}

inline double l1(const Vec& v) { return v.lpNorm<1>(); }

}  // namespace pam::detail
