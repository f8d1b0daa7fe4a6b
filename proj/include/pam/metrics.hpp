#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pam/geometry.hpp"
#include "pam/tensor.hpp"

namespace pam {

// Lengths are in the grid's units (meters); dB values use 20 log10 for PCID and CNR.
// -infinity is the "below floor" sentinel for log-of-zero cases.

enum class Axis { lateral, axial };

struct FwhmResult {
  double width = 0.0;
  bool truncated_low = false;   ///< no half-maximum crossing before the first sample
  bool truncated_high = false;  ///< no crossing after the last sample

  bool truncated() const noexcept { return truncated_low || truncated_high; }
};

/// Half-maximum width of a sampled profile around `peak`, crossings by linear interpolation.
/// A side without a crossing extends to the edge sample and sets its truncation flag.
FwhmResult fwhm_profile(std::span<const double> profile, std::size_t peak, double pitch);

/// FWHM of the profile through `peak` along `axis`. Throws UndefinedMetric when the peak is 0.
FwhmResult fwhm(const PowerMap& map, PixelIndex peak, Axis axis);

/// Up to k maxima, each suppressing pixels within `exclusion` of it. Throws UndefinedMetric
/// if fewer than k positive peaks exist.
std::vector<PixelIndex> detect_peaks(const PowerMap& map, std::size_t k, double exclusion = 1e-3);

struct LocalizationResult {
  double mean_error = 0.0;
  /// detections[t] is the peak assigned to truth t.
  std::vector<PixelIndex> detections;
};

/// Detects truth.size() peaks and matches them to the truths with minimal total distance.
LocalizationResult localize(const std::vector<Point3>& truth, const PowerMap& map, double exclusion = 1e-3);
double position_error(const std::vector<Point3>& truth, const PowerMap& map);

/// Mean distance under the best assignment of detections to truths (exhaustive, k <= 8).
LocalizationResult match_detections(const std::vector<Point3>& truth, const std::vector<Point3>& detected);

/// Map value at fractional pixel coordinates (bilinear).
double bilinear(const PowerMap& map, double fi, double fj);

/// 20 log10(I_min / I_max): I_min is the least bilinear sample on the segment p1-p2
/// (max(|di|, |dj|) + 1 evenly spaced points), I_max the smaller endpoint value.
double pcid(const PowerMap& map, PixelIndex p1, PixelIndex p2);

/// Two sources count as resolved when PCID < -6 dB.
inline constexpr double kResolvedPcid = -6.0;

/// 20 log10(|mu_s - mu_n| / sqrt(var_s + var_n)) with population variances.
double cnr(const PowerMap& map, const ZoneMasks& zones);

struct DiceResult {
  double value = 0.0;
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
};

/// Overlap of the signal zone with pixels at or above `threshold_db` (power, 10 log10 of X / max X),
/// counting detections only inside the signal and noise zones.
DiceResult dice_counts(const PowerMap& map, const ZoneMasks& zones, double threshold_db = -3.0);
double dice(const PowerMap& map, const ZoneMasks& zones, double threshold_db = -3.0);

/// ||reference - test||^2 / ||reference||^2.
double nmse(const RfFrame& reference, const RfFrame& test);
double nmse(std::span<const double> reference, std::span<const double> test);

// Aggregation

inline constexpr double kDbFloor = -20.0;

double mean(std::span<const double> v);
/// Population standard deviation.
double stddev(std::span<const double> v);
double median(std::vector<double> v);

/// "m (s)" with `decimals` digits after the point. With `db_floor`, means at or below -20 dB
/// (including -inf) print as "<-20".
std::string format_mean_std(std::span<const double> v, int decimals = 1, bool db_floor = false);

}  // namespace pam
