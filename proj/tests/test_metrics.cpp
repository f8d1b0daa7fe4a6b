#include <doctest.h>

#include <cmath>
#include <limits>

#include "pam/error.hpp"
#include "pam/metrics.hpp"

using namespace pam;

namespace {

PowerMap row_map(const std::vector<double>& v, double pitch = 1e-3) {
  PowerMap m(GridSpec{0.0, 1e-3, pitch, pitch, v.size(), 1});
  m.values = v;
  return m;
}

ZoneMasks zones_for(const GridSpec& g, const std::vector<std::uint8_t>& s, const std::vector<std::uint8_t>& n) {
  return {g, s, n};
}

}  // namespace

TEST_CASE("fwhm examples") {
  const std::vector<double> tri{0, 1, 0};
  auto r = fwhm_profile(tri, 1, 1.0);
  CHECK(r.width == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(r.truncated());

  std::vector<double> g;
  for (int i = -200; i <= 200; ++i) {
    const double x = i * 0.05;
    g.push_back(std::exp(-0.5 * x * x));
  }
  r = fwhm_profile(g, 200, 0.05);
  CHECK(std::abs(r.width - 2.0 * std::sqrt(2.0 * std::log(2.0))) <= 0.02);

  const std::vector<double> flat(7, 1.0);
  r = fwhm_profile(flat, 3, 1.0);
  CHECK(r.truncated_low);
  CHECK(r.truncated_high);
  CHECK(r.width == 6.0);

  const auto m = row_map({0, 1, 0});
  CHECK(fwhm(m, {1, 0}, Axis::lateral).width == doctest::Approx(1e-3));
  CHECK_THROWS_AS(fwhm(row_map({0, 0, 0}), {1, 0}, Axis::lateral), UndefinedMetric);
}

TEST_CASE("position error") {
  const auto r = match_detections({{-5e-3, 0, 72e-3}}, {{-5e-3, 0, 72.1e-3}});
  CHECK(r.mean_error == doctest::Approx(0.1e-3).epsilon(1e-9));

  const std::vector<Point3> truth{{-5e-3, 0, 72e-3}, {-3e-3, 0, 72e-3}};
  const std::vector<Point3> det{{-4.9e-3, 0, 72e-3}, {-3e-3, 0, 72.2e-3}};
  const std::vector<Point3> swapped{det[1], det[0]};
  CHECK(match_detections(truth, det).mean_error == match_detections(truth, swapped).mean_error);
  CHECK(match_detections(truth, det).mean_error == doctest::Approx(0.15e-3).epsilon(1e-9));

  PowerMap map(GridSpec{-1e-3, 1e-3, 0.2e-3, 0.2e-3, 11, 11});
  map.at(3, 4) = 1.0;
  map.at(8, 8) = 0.5;
  const auto loc = localize({map.grid.position(map.grid.flat_index({8, 8})), map.grid.position(map.grid.flat_index({3, 4}))}, map);
  CHECK(loc.mean_error == 0.0);
  CHECK(loc.detections[0] == PixelIndex{8, 8});
  CHECK_THROWS_AS(localize({{0, 0, 2e-3}, {0, 0, 2e-3}, {0, 0, 2e-3}}, map), UndefinedMetric);
}

TEST_CASE("peak detection respects the exclusion radius") {
  PowerMap map(GridSpec{0.0, 1e-3, 0.2e-3, 0.2e-3, 20, 1});
  map.values = std::vector<double>(20, 0.0);
  map.values[5] = 1.0;
  map.values[6] = 0.9;
  map.values[15] = 0.5;
  const auto p = detect_peaks(map, 2);
  CHECK(p[0] == PixelIndex{5, 0});
  CHECK(p[1] == PixelIndex{15, 0});
}

TEST_CASE("pcid examples") {
  const auto m = row_map({1.0, 0.1, 0.8});
  CHECK(pcid(m, {0, 0}, {2, 0}) == doctest::Approx(20 * std::log10(0.1 / 0.8)).epsilon(1e-12));
  CHECK(pcid(m, {0, 0}, {2, 0}) == doctest::Approx(-18.06).epsilon(1e-3));
  CHECK(pcid(m, {2, 0}, {0, 0}) == pcid(m, {0, 0}, {2, 0}));
  const auto flat = row_map({1.0, 0.8, 0.8});
  CHECK(pcid(flat, {0, 0}, {2, 0}) == 0.0);
  CHECK_FALSE(pcid(flat, {0, 0}, {2, 0}) < kResolvedPcid);
  CHECK(pcid(row_map({1.0, 0.0, 0.8}), {0, 0}, {2, 0}) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(pcid(row_map({0.0, 0.5, 0.8}), {0, 0}, {2, 0}), UndefinedMetric);

  PowerMap diag(GridSpec{0.0, 1e-3, 1e-3, 1e-3, 3, 3});
  diag.values = {4, 1, 1, 1, 2, 1, 1, 1, 4};
  CHECK(pcid(diag, {0, 0}, {2, 2}) == doctest::Approx(20 * std::log10(2.0 / 4.0)));
  CHECK(bilinear(diag, 0.5, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("cnr") {
  GridSpec g{0.0, 1e-3, 1e-3, 1e-3, 10, 1};
  std::vector<std::uint8_t> s{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  std::vector<std::uint8_t> n{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  PowerMap m(g);
  m.values = {1, 1, 1, 1.2, 0.8, 0.2, 0.2, 0.2, 0.3, 0.1};
  // mu_s = 1, var_s = 0.016; mu_n = 0.2, var_n = 0.004 (population).
  const double expected = 20 * std::log10(0.8 / std::sqrt(0.016 + 0.004));
  CHECK(cnr(m, zones_for(g, s, n)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(cnr(m, zones_for(g, s, n)) == doctest::Approx(15.05).epsilon(1e-3));
  PowerMap scaled = m;
  for (auto& v : scaled.values) v *= 7.5;
  CHECK(cnr(scaled, zones_for(g, s, n)) == doctest::Approx(cnr(m, zones_for(g, s, n))).epsilon(1e-12));
  PowerMap same(g);
  same.values = {1, 2, 1, 2, 1, 1, 2, 1, 2, 1};
  CHECK(cnr(same, zones_for(g, s, n)) == -std::numeric_limits<double>::infinity());
  PowerMap constant(g);
  constant.values = std::vector<double>(10, 1.0);
  CHECK_THROWS_AS(cnr(constant, zones_for(g, s, n)), UndefinedMetric);
}

TEST_CASE("dice") {
  GridSpec g{0.0, 1e-3, 1e-3, 1e-3, 200, 1};
  std::vector<std::uint8_t> s(200, 0), n(200, 0);
  for (int i = 0; i < 100; ++i) s[i] = 1;
  for (int i = 100; i < 200; ++i) n[i] = 1;
  const ZoneMasks z{g, s, n};

  PowerMap exact(g);
  for (int i = 0; i < 100; ++i) exact.values[i] = 1.0;
  CHECK(dice(exact, z) == 1.0);

  PowerMap disjoint(g);
  for (int i = 150; i < 160; ++i) disjoint.values[i] = 1.0;
  CHECK(dice(disjoint, z) == 0.0);

  PowerMap half(g);
  for (int i = 0; i < 50; ++i) half.values[i] = 1.0;
  for (int i = 50; i < 100; ++i) half.values[i] = 0.1;
  const auto c = dice_counts(half, z);
  CHECK(c.true_positive == 50);
  CHECK(c.false_negative == 50);
  CHECK(c.false_positive == 0);
  CHECK(c.value == doctest::Approx(2.0 * 50 / 150));

  PowerMap edge(g);
  edge.values[0] = 1.0;
  edge.values[1] = 0.5012;
  edge.values[2] = 0.5011;
  CHECK(dice_counts(edge, z).true_positive == 2);
  CHECK_THROWS_AS(dice(PowerMap(g), z), UndefinedMetric);
}

TEST_CASE("nmse") {
  RfFrame a(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(nmse(a, a) == 0.0);
  CHECK(nmse(a, RfFrame(2, 3)) == 1.0);
  RfFrame b = a;
  for (auto& v : b.flat()) v *= 2.0;
  CHECK(nmse(a, b) == 1.0);
  CHECK_THROWS_AS(nmse(RfFrame(2, 3), a), UndefinedMetric);
}

TEST_CASE("aggregation and formatting") {
  const std::vector<double> v{0.8, 1.0, 1.2};
  CHECK(format_mean_std(v) == "1.0 (0.2)");
  const std::vector<double> same{3.25, 3.25};
  CHECK(format_mean_std(same, 2) == "3.25 (0.00)");
  const std::vector<double> low{-25.0, -std::numeric_limits<double>::infinity()};
  CHECK(format_mean_std(low, 1, true) == "<-20");
  const std::vector<double> mid{-13.0, -14.0};
  CHECK(format_mean_std(mid, 1, true) == "-13.5 (0.5)");
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(stddev(v) == doctest::Approx(std::sqrt(0.08 / 3)));
}
