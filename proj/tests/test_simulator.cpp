#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "pam/error.hpp"
#include "pam/forward_operator.hpp"
#include "pam/metrics.hpp"
#include "pam/simulator.hpp"

using namespace pam;

namespace {

AcquisitionGeometry wide() {
  AcquisitionGeometry g;
  g.sensor_positions = linear_array(16, 0.3e-3);
  g.grid = {-2e-3, 4e-3, 0.2e-3, 0.2e-3, 21, 21};
  g.num_samples = 120;
  return g;
}

}  // namespace

TEST_CASE("point scenes") {
  AcquisitionGeometry g;
  g.sensor_positions = linear_array(128, 0.3e-3);
  g.grid = {-15e-3, 55e-3, 0.2e-3, 0.2e-3, 101, 151};
  g.num_samples = 400;
  const auto spec = default_waveform_spec(WaveformType::inertial);
  const auto lateral = make_point_scene({{-5e-3, 0, 72e-3}, {-3e-3, 0, 72e-3}}, g, spec, 1);
  REQUIRE(lateral.events.size() == 2);
  CHECK(std::hypot(lateral.events[0].x - lateral.events[1].x, lateral.events[0].z - lateral.events[1].z) ==
        doctest::Approx(2e-3));
  const auto axial = make_point_scene({{-3e-3, 0, 64e-3}, {-3e-3, 0, 72e-3}}, g, spec, 1);
  CHECK(axial.events[1].z - axial.events[0].z == doctest::Approx(8e-3));
  CHECK(axial.events[0].x == axial.events[1].x);
  CHECK(axial.zones.disjoint());
  CHECK(axial.zones.signal_count() > 0);
  CHECK(axial.zones.noise_count() > 0);
  CHECK_THROWS_AS(make_point_scene({}, g, spec, 1), InvalidInput);
  CHECK_THROWS_AS(make_point_scene({{0, 0, 200e-3}}, g, spec, 1), InvalidInput);
}

TEST_CASE("grid node source matches the operator") {
  const auto g = fixture::toy();
  WaveformSpec imp;
  imp.impulse = true;
  const Point3 p = g.grid.position(g.grid.flat_index({2, 1}));
  const auto scene = make_point_scene({p}, g, imp, 0, 3);
  const auto rf = synthesize_rf(scene, g.num_samples);
  SourceCube x(3, 5, 10);
  x(2, 1, 3) = 1.0;
  const auto ref = DelayOperator(g).apply_forward(x);
  CHECK(std::vector<double>(rf.flat().begin(), rf.flat().end()) ==
        std::vector<double>(ref.flat().begin(), ref.flat().end()));
  const auto cube = rasterize_scene(scene, g.num_samples);
  CHECK(std::vector<double>(cube.flat().begin(), cube.flat().end()) ==
        std::vector<double>(x.flat().begin(), x.flat().end()));
}

TEST_CASE("cloud scenes") {
  AcquisitionGeometry g;
  g.sensor_positions = linear_array(128, 0.3e-3);
  g.grid = {-15e-3, 55e-3, 0.2e-3, 0.2e-3, 101, 151};
  g.num_samples = 400;
  const auto spec = default_waveform_spec(WaveformType::inertial);
  const auto a = make_cloud_scene({-7e-3, 0, 70e-3}, 2e-3, 100.0, g, spec, 1, 400);
  CHECK(a.events.size() == 314);
  for (const auto& e : a.events) CHECK(std::hypot(e.x + 7e-3, e.z - 70e-3) <= 1e-3 + 1e-15);
  const auto b = make_cloud_scene({-7e-3, 0, 70e-3}, 2e-3, 100.0, g, spec, 2, 400);
  CHECK(b.events.size() == 314);
  CHECK(a.events[0].x != b.events[0].x);
  const auto again = make_cloud_scene({-7e-3, 0, 70e-3}, 2e-3, 100.0, g, spec, 1, 400);
  CHECK(again.events[10].x == a.events[10].x);
  CHECK(again.events[10].start_sample == a.events[10].start_sample);
  const auto tiny = make_cloud_scene({-7e-3, 0, 70e-3}, 2e-3, 1e-9, g, spec, 1, 400);
  CHECK(tiny.events.size() == 1);
  CHECK(a.zones.disjoint());
  CHECK_THROWS_AS(make_cloud_scene({-7e-3, 0, 70e-3}, 0.0, 1.0, g, spec, 1), InvalidInput);
}

TEST_CASE("synthesis is linear") {
  const auto g = wide();
  const auto spec = default_waveform_spec(WaveformType::inertial);
  CHECK(synthesize_rf(Scene{g, {}, {}, {}, {}, spec, 0}, 50).flat()[0] == 0.0);
  const auto s1 = make_point_scene({{0.13e-3, 0, 5.07e-3}}, g, spec, 0, 4);
  const auto s2 = make_point_scene({{-1.1e-3, 0, 6.5e-3}}, g, spec, 0, 9);
  Scene both = s1;
  both.events.push_back(s2.events[0]);
  const auto y1 = synthesize_rf(s1, 120), y2 = synthesize_rf(s2, 120), y = synthesize_rf(both, 120);
  for (std::size_t e = 0; e < y.size(); ++e) CHECK(y.flat()[e] == doctest::Approx(y1.flat()[e] + y2.flat()[e]));
  Scene loud = s1;
  loud.events[0].amplitude = 3.0;
  const auto y3 = synthesize_rf(loud, 120);
  for (std::size_t e = 0; e < y.size(); ++e) CHECK(y3.flat()[e] == doctest::Approx(3.0 * y1.flat()[e]));
}

TEST_CASE("off-grid source uses the integer delay rule") {
  const auto g = wide();
  WaveformSpec imp;
  imp.impulse = true;
  const Point3 p{0.123e-3, 0, 5.321e-3};
  const auto y = synthesize_rf(make_point_scene({p}, g, imp, 0, 2), 120);
  for (std::size_t m = 0; m < g.num_sensors(); ++m) {
    const auto k = static_cast<std::size_t>(2 + compute_delay(g.sensor_positions[m], p, 1540.0, 10e6) - 1);
    CHECK(y(m, k) == 1.0);
  }
  CHECK_THROWS_AS(rasterize_scene(make_point_scene({p}, g, imp, 0, 2), 120), InvalidInput);
}

TEST_CASE("noise injection") {
  RfFrame y(200, 600);
  Rng rng(1);
  for (auto& v : y.flat()) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const auto clean = add_noise(y, INFINITY, 3);
  CHECK(std::vector<double>(clean.flat().begin(), clean.flat().end()) ==
        std::vector<double>(y.flat().begin(), y.flat().end()));

  const auto n = add_noise_with_realization(y, 10.0, 5);
  double noise_power = 0.0;
  for (double v : n.noise.flat()) noise_power += v * v;
  noise_power /= static_cast<double>(y.size());
  CHECK(std::abs(10 * std::log10(1.0 / noise_power) - 10.0) <= 0.5);
  for (std::size_t e = 0; e < y.size(); ++e) {
    CHECK(std::abs((n.frame.flat()[e] - n.noise.flat()[e]) - y.flat()[e]) <= 4 * std::numeric_limits<double>::epsilon() * (1 + std::abs(n.frame.flat()[e])));
  }
  const auto again = add_noise(y, 10.0, 5);
  CHECK(std::vector<double>(again.flat().begin(), again.flat().end()) ==
        std::vector<double>(n.frame.flat().begin(), n.frame.flat().end()));
  REQUIRE(n.frame.noise.has_value());
  CHECK(n.frame.noise->seed == 5);
  CHECK_THROWS_AS(add_noise(RfFrame(2, 3), 10.0, 1), InvalidInput);
}

TEST_CASE("default waveforms") {
  const auto w = default_waveform(WaveformType::inertial, 10e6);
  REQUIRE(w.size() == 10);
  CHECK(w[5] == 1.0);
  for (double v : w) CHECK(std::abs(v) <= 1.0);
  const auto tone = default_waveform(WaveformType::non_inertial, 10e6);
  REQUIRE(tone.size() == 200);
  int rising = 0;
  for (std::size_t j = 1; j < tone.size(); ++j) rising += (tone[j - 1] < 0 && tone[j] >= 0) ? 1 : 0;
  CHECK(rising >= 19);
  CHECK(rising <= 20);
  double peak = 0.0;
  for (double v : tone) peak = std::max(peak, std::abs(v));
  CHECK(peak == 1.0);
  CHECK_THROWS_AS(default_waveform(WaveformType::inertial, 0.0), InvalidInput);
}
