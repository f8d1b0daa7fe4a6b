#include "pam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "pam/error.hpp"

namespace pam {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double db20(double ratio) { return ratio > 0 ? 20.0 * std::log10(ratio) : kNegInf; }

void check_map(const PowerMap& map) {
  if (map.values.size() != map.grid.num_pixels()) throw InvalidInput("power map: size does not match its grid");
}

void check_zones(const PowerMap& map, const ZoneMasks& zones) {
  check_map(map);
  if (zones.signal.size() != map.values.size() || zones.noise.size() != map.values.size()) {
    throw InvalidInput("zone masks do not match the map");
  }
}

}  // namespace

FwhmResult fwhm_profile(std::span<const double> profile, std::size_t peak, double pitch) {
  if (peak >= profile.size()) throw InvalidInput("fwhm: peak index out of range");
  const double top = profile[peak];
  if (!(top > 0)) throw UndefinedMetric("fwhm: peak value is not positive");
  const double half = 0.5 * top;

  FwhmResult r;
  double lo = 0.0;
  std::size_t a = peak;
  while (a > 0 && profile[a - 1] > half) --a;
  if (a == 0) {
    r.truncated_low = true;
    lo = 0.0;
  } else {
    const double v0 = profile[a - 1], v1 = profile[a];
    lo = static_cast<double>(a - 1) + (half - v0) / (v1 - v0);
  }

  double hi = 0.0;
  std::size_t b = peak;
  const std::size_t last = profile.size() - 1;
  while (b < last && profile[b + 1] > half) ++b;
  if (b == last) {
    r.truncated_high = true;
    hi = static_cast<double>(last);
  } else {
    const double v0 = profile[b], v1 = profile[b + 1];
    hi = static_cast<double>(b) + (v0 - half) / (v0 - v1);
  }
  r.width = (hi - lo) * pitch;
  return r;
}

FwhmResult fwhm(const PowerMap& map, PixelIndex peak, Axis axis) {
  check_map(map);
  const auto& g = map.grid;
  if (peak.i >= g.nx || peak.j >= g.nz) throw InvalidInput("fwhm: peak outside the map");
  std::vector<double> profile;
  if (axis == Axis::lateral) {
    for (std::size_t i = 0; i < g.nx; ++i) profile.push_back(map.at(i, peak.j));
    return fwhm_profile(profile, peak.i, g.pitch_x);
  }
  for (std::size_t j = 0; j < g.nz; ++j) profile.push_back(map.at(peak.i, j));
  return fwhm_profile(profile, peak.j, g.pitch_z);
}

std::vector<PixelIndex> detect_peaks(const PowerMap& map, std::size_t k, double exclusion) {
  check_map(map);
  const auto& g = map.grid;
  std::vector<std::uint8_t> blocked(map.values.size(), 0);
  std::vector<PixelIndex> peaks;
  while (peaks.size() < k) {
    std::size_t best = map.values.size();
    for (std::size_t n = 0; n < map.values.size(); ++n) {
      if (blocked[n] || !(map.values[n] > 0)) continue;
      if (best == map.values.size() || map.values[n] > map.values[best]) best = n;
    }
    if (best == map.values.size()) {
      throw UndefinedMetric("detect_peaks: found " + std::to_string(peaks.size()) + " of " + std::to_string(k) +
                            " nonzero peaks");
    }
    peaks.push_back(g.pixel_index(best));
    const Point3 c = g.position(best);
    for (std::size_t n = 0; n < map.values.size(); ++n) {
      const Point3 p = g.position(n);
      if (std::hypot(p.x - c.x, p.z - c.z) <= exclusion) blocked[n] = 1;
    }
  }
  return peaks;
}

LocalizationResult match_detections(const std::vector<Point3>& truth, const std::vector<Point3>& detected) {
  if (truth.size() != detected.size() || truth.empty()) {
    throw InvalidInput("match_detections: need equally many truths and detections");
  }
  if (truth.size() > 8) throw InvalidInput("match_detections: at most 8 sources");
  std::vector<std::size_t> perm(truth.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_perm = perm;
  do {
    double total = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      const auto& d = detected[perm[t]];
      total += std::hypot(truth[t].x - d.x, truth[t].z - d.z);
    }
    if (total < best) {
      best = total;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  LocalizationResult r;
  r.mean_error = best / static_cast<double>(truth.size());
  for (std::size_t t = 0; t < truth.size(); ++t) r.detections.push_back({best_perm[t], 0});
  return r;
}

LocalizationResult localize(const std::vector<Point3>& truth, const PowerMap& map, double exclusion) {
  const auto peaks = detect_peaks(map, truth.size(), exclusion);
  std::vector<Point3> pos;
  for (const auto& p : peaks) pos.push_back(map.grid.position(map.grid.flat_index(p)));
  auto r = match_detections(truth, pos);
  for (auto& d : r.detections) d = peaks[d.i];
  return r;
}

double position_error(const std::vector<Point3>& truth, const PowerMap& map) {
  return localize(truth, map).mean_error;
}

double bilinear(const PowerMap& map, double fi, double fj) {
  const auto& g = map.grid;
  const double ci = std::clamp(fi, 0.0, static_cast<double>(g.nx - 1));
  const double cj = std::clamp(fj, 0.0, static_cast<double>(g.nz - 1));
  const auto i0 = static_cast<std::size_t>(std::floor(ci));
  const auto j0 = static_cast<std::size_t>(std::floor(cj));
  const std::size_t i1 = std::min(i0 + 1, g.nx - 1);
  const std::size_t j1 = std::min(j0 + 1, g.nz - 1);
  const double a = ci - static_cast<double>(i0);
  const double b = cj - static_cast<double>(j0);
  const double top = (1 - b) * map.at(i0, j0) + b * map.at(i0, j1);
  const double bottom = (1 - b) * map.at(i1, j0) + b * map.at(i1, j1);
  return (1 - a) * top + a * bottom;
}

double pcid(const PowerMap& map, PixelIndex p1, PixelIndex p2) {
  check_map(map);
  const auto& g = map.grid;
  if (p1 == p2) throw InvalidInput("pcid: the two peaks coincide");
  if (p1.i >= g.nx || p1.j >= g.nz || p2.i >= g.nx || p2.j >= g.nz) throw InvalidInput("pcid: peak outside the map");
  const double v1 = map.at(p1), v2 = map.at(p2);
  if (!(v1 > 0) || !(v2 > 0)) throw UndefinedMetric("pcid: peak value is zero");

  const double di = static_cast<double>(p2.i) - static_cast<double>(p1.i);
  const double dj = static_cast<double>(p2.j) - static_cast<double>(p1.j);
  const auto steps = static_cast<std::size_t>(std::max(std::abs(di), std::abs(dj)));
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(steps);
    lowest = std::min(lowest, bilinear(map, static_cast<double>(p1.i) + t * di, static_cast<double>(p1.j) + t * dj));
  }
  return db20(lowest / std::min(v1, v2));
}

double cnr(const PowerMap& map, const ZoneMasks& zones) {
  check_zones(map, zones);
  std::vector<double> in, out;
  for (std::size_t n = 0; n < map.values.size(); ++n) {
    if (zones.signal[n]) in.push_back(map.values[n]);
    if (zones.noise[n]) out.push_back(map.values[n]);
  }
  if (in.empty() || out.empty()) throw UndefinedMetric("cnr: empty signal or noise zone");
  const double si = stddev(in), so = stddev(out);
  const double den = std::sqrt(si * si + so * so);
  if (!(den > 0)) throw UndefinedMetric("cnr: both zones have zero variance");
  return db20(std::abs(mean(in) - mean(out)) / den);
}

DiceResult dice_counts(const PowerMap& map, const ZoneMasks& zones, double threshold_db) {
  check_zones(map, zones);
  const double top = map.max_value();
  if (!(top > 0)) throw UndefinedMetric("dice: map is zero");
  if (zones.signal_count() == 0) throw UndefinedMetric("dice: empty signal zone");
  DiceResult r;
  for (std::size_t n = 0; n < map.values.size(); ++n) {
    if (!zones.signal[n] && !zones.noise[n]) continue;
    const double v = map.values[n];
    const bool detected = v > 0 && 10.0 * std::log10(v / top) >= threshold_db;
    if (zones.signal[n]) {
      if (detected) {
        ++r.true_positive;
      } else {
        ++r.false_negative;
      }
    } else if (detected) {
      ++r.false_positive;
    }
  }
  const auto tp = static_cast<double>(r.true_positive);
  r.value = 2.0 * tp / (2.0 * tp + static_cast<double>(r.false_positive + r.false_negative));
  return r;
}

double dice(const PowerMap& map, const ZoneMasks& zones, double threshold_db) {
  return dice_counts(map, zones, threshold_db).value;
}

double nmse(std::span<const double> reference, std::span<const double> test) {
  if (reference.size() != test.size()) throw InvalidInput("nmse: shape mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t e = 0; e < reference.size(); ++e) {
    const double d = reference[e] - test[e];
    num += d * d;
    den += reference[e] * reference[e];
  }
  if (!(den > 0)) throw UndefinedMetric("nmse: reference is zero");
  return num / den;
}

double nmse(const RfFrame& reference, const RfFrame& test) {
  if (reference.num_sensors() != test.num_sensors() || reference.nt() != test.nt()) {
    throw InvalidInput("nmse: shape mismatch");
  }
  return nmse(reference.flat(), test.flat());
}

double mean(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("mean of an empty set");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidInput("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string format_mean_std(std::span<const double> v, int decimals, bool db_floor) {
  const double m = mean(v);
  if (db_floor && m <= kDbFloor) return "<-20";
  const double s = stddev(v);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.*f (%.*f)", decimals, m + 0.0, decimals, s + 0.0);
  return buf;
}

}  // namespace pam
