#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pam/error.hpp"
#include "pam/forward_operator.hpp"

using namespace pam;

namespace {

Eigen::Map<const Eigen::VectorXd> vec(std::span<const double> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double n = std::max(b.norm(), 1e-300);
  return (a - b).norm() / n;
}

}  // namespace

TEST_CASE("zero in, zero out") {
  const DelayOperator op(fixture::toy());
  const auto y = op.apply_forward(SourceCube(3, 5, 10));
  for (double v : y.flat()) CHECK(v == 0.0);
  const auto x = op.apply_adjoint(RfFrame(3, 10));
  for (double v : x.flat()) CHECK(v == 0.0);
}

TEST_CASE("impulse response of a block") {
  const auto g = fixture::toy();
  const DelayOperator op(g);
  const std::size_t n = 7, k = 2;
  SourceCube x(3, 5, 10);
  const auto p = g.grid.pixel_index(n);
  x(p.i, p.j, k) = 1.0;
  const auto y = op.apply_forward(x);
  for (std::size_t m = 0; m < 3; ++m) {
    const auto at = static_cast<std::size_t>(static_cast<std::int64_t>(k) + op.table().at(m, n) - 1);
    for (std::size_t t = 0; t < 10; ++t) CHECK(y(m, t) == (t == at ? 1.0 : 0.0));
  }
}

TEST_CASE("adjoint impulse response") {
  const auto g = fixture::toy();
  const DelayOperator op(g);
  RfFrame y(3, 10);
  const std::size_t m = 1, k1 = 8;
  y(m, k1) = 1.0;
  const auto x = op.apply_adjoint(y);
  for (std::size_t n = 0; n < 15; ++n) {
    const std::int64_t k2 = static_cast<std::int64_t>(k1) - op.table().at(m, n) + 1;
    for (std::size_t t = 0; t < 10; ++t) {
      CHECK(x.waveform(n)[t] == (static_cast<std::int64_t>(t) == k2 ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("toy forward equals the dense product exactly") {
  const auto g = fixture::toy();
  const DelayOperator op(g);
  const auto a = oracle::dense_operator(oracle::delays(g), 3, 15, 10);
  CHECK(a == materialize_dense(op));
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    SourceCube x(3, 5, 10);
    for (auto& v : x.flat()) v = static_cast<double>(rng.uniform_int(-5, 5));
    const auto y = op.apply_forward(x);
    const Eigen::VectorXd ref = a * vec(x.flat());
    CHECK(vec(y.flat()) == ref);
  }
}

TEST_CASE("adjoint identity on the toy instance") {
  const auto g = fixture::toy();
  const DelayOperator op(g);
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const auto x = fixture::random_cube(3, 5, 10, rng);
    const auto y = fixture::random_frame(3, 10, rng);
    const double lhs = vec(op.apply_forward(x).flat()).dot(vec(y.flat()));
    const double rhs = vec(x.flat()).dot(vec(op.apply_adjoint(y).flat()));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), 1.0));
  }
}

TEST_CASE("dense blocks follow the shifted identity rule") {
  AcquisitionGeometry g;
  g.sensor_positions = {{0, 0, 0}};
  g.num_samples = 4;
  g.grid = {0.0, 1e-4, 1e-4, 1e-4, 1, 1};
  {
    const DelayOperator op(DelayTable{1, 1, {1}, 0, 0}, g.grid, 4);
    CHECK(materialize_dense(op) == Eigen::MatrixXd::Identity(4, 4));
  }
  {
    const DelayOperator op(DelayTable{1, 1, {3}, 0, 0}, g.grid, 4);
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(4, 4);
    e(2, 0) = 1;
    e(3, 1) = 1;
    CHECK(materialize_dense(op) == e);
  }
  const auto toy = fixture::toy();
  const DelayOperator op(toy);
  const auto a = materialize_dense(op);
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t n = 0; n < 15; ++n) {
      const double ones = a.block(static_cast<Eigen::Index>(m * 10), static_cast<Eigen::Index>(n * 10), 10, 10).sum();
      CHECK(ones == static_cast<double>(std::max<std::int64_t>(0, 10 - op.table().at(m, n) + 1)));
    }
  }
}

TEST_CASE("dense materialization refuses large instances") {
  const DelayOperator op(fixture::toy());
  CHECK_THROWS_AS(materialize_dense(op, 100), InvalidInput);
}

TEST_CASE("dimension mismatch") {
  const DelayOperator op(fixture::toy());
  CHECK_THROWS_AS(op.apply_forward(SourceCube(3, 5, 9)), InvalidInput);
  CHECK_THROWS_AS(op.apply_adjoint(RfFrame(2, 10)), InvalidInput);
}

TEST_CASE("linearity and causality") {
  const auto g = fixture::toy();
  const DelayOperator op(g);
  Rng rng(5);
  const auto x1 = fixture::random_cube(3, 5, 10, rng);
  const auto x2 = fixture::random_cube(3, 5, 10, rng);
  SourceCube c(3, 5, 10);
  for (std::size_t e = 0; e < c.size(); ++e) c.flat()[e] = 2.5 * x1.flat()[e] - 0.75 * x2.flat()[e];
  const Eigen::VectorXd lhs = vec(op.apply_forward(c).flat());
  const Eigen::VectorXd rhs = 2.5 * vec(op.apply_forward(x1).flat()) - 0.75 * vec(op.apply_forward(x2).flat());
  CHECK(rel(lhs, rhs) <= 1e-12);

  SourceCube imp(3, 5, 10);
  imp(1, 2, 3) = 1.0;
  const auto y = op.apply_forward(imp);
  const std::size_t n = g.grid.flat_index({1, 2});
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::int64_t t = 0; t < 3 + op.table().at(m, n) - 1 && t < 10; ++t) CHECK(y(m, static_cast<std::size_t>(t)) == 0.0);
  }
}

TEST_CASE("operator norm estimate") {
  SUBCASE("identity") {
    AcquisitionGeometry g;
    g.sensor_positions = {{0, 0, 0}};
    g.grid = {0.0, 1e-4, 1e-4, 1e-4, 1, 1};
    g.num_samples = 6;
    const DelayOperator op(DelayTable{1, 1, {1}, 0, 0}, g.grid, 6);
    CHECK(std::abs(estimate_operator_norm(op, 20, 1) - 1.0) <= 1e-6);
  }
  SUBCASE("toy against the dense SVD") {
    const DelayOperator op(fixture::toy());
    const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(materialize_dense(op)).singularValues()(0);
    std::vector<double> history;
    const double l = estimate_operator_norm(op, 200, 4, &history);
    CHECK(std::abs(l - s * s) <= 0.01 * s * s);
    for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] >= history[i - 1] * (1 - 1e-12));
  }
  SUBCASE("duplicated sensors double the estimate") {
    auto g = fixture::toy();
    const DelayOperator op(g);
    g.sensor_positions.insert(g.sensor_positions.end(), g.sensor_positions.begin(), g.sensor_positions.end());
    const DelayOperator twice(g);
    const double a = estimate_operator_norm(op, 200, 9);
    const double b = estimate_operator_norm(twice, 200, 9);
    CHECK(std::abs(b - 2 * a) <= 0.01 * 2 * a);
  }
}
