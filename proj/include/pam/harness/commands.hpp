#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pam/harness/config.hpp"
#include "pam/simulator.hpp"
#include "pam/solvers.hpp"
#include "pam/tensor.hpp"

namespace pam::harness {

/// Progress sink; receives one line per event. May be empty.
using Log = std::function<void(const std::string&)>;

/// Replicas are numbered from 1; replica r uses seed base + r.
std::uint64_t replica_seed(const ExperimentConfig& cfg, std::size_t replica);
/// Seed of the noise stream of a replica, distinct from the scene stream.
std::uint64_t noise_seed(std::uint64_t replica_seed);
std::filesystem::path replica_dir(const ExperimentConfig& cfg, std::size_t replica);
std::filesystem::path method_dir(const ExperimentConfig& cfg, std::size_t replica, Method m);

/// Ground-truth scene of a replica on the recording geometry.
Scene build_scene(const ExperimentConfig& cfg, std::size_t replica);

struct ReplicaData {
  Scene scene;
  RfFrame clean;
  RfFrame noisy;
};

ReplicaData simulate_replica(const ExperimentConfig& cfg, std::size_t replica);

/// Writes per replica: scene.json, rf_clean.pamt, rf_noisy.pamt; and delays.pamt at the root.
void cmd_simulate(const ExperimentConfig& cfg, const Log& log = {});

struct MethodResult {
  PowerMap map;
  std::optional<SolveReport> report;  ///< absent for tddas
  double lambda = 0.0, gamma = 0.0, mu = 0.0;
};

/// Runs one method on a windowed frame (no file I/O). Throws DivergedSolve on divergence.
MethodResult run_method(const ExperimentConfig& cfg, Method m, const DelayOperator& op, const RfFrame& windowed);

/// Reads rf_noisy.pamt of every replica, keeps the leading window, reconstructs and writes
/// map.pamt, map.csv, map.pgm, and for the solvers trace.csv, estimate.pamt and solve.json.
/// On divergence the partial trace is written before the error propagates.
void cmd_beamform(const ExperimentConfig& cfg, Method m, const Log& log = {});

struct MetricRow {
  std::string scenario;
  std::size_t replica = 0;
  std::uint64_t seed = 0;
  Method method = Method::tddas;
  // NaN when not applicable; lengths in mm.
  double fwhm_axial = 0.0;
  double fwhm_lateral = 0.0;
  bool fwhm_truncated = false;
  double position_error = 0.0;
  double pcid = 0.0;
  double cnr = 0.0;
  double dice = 0.0;
};

/// Metrics of one map against its scene, following the scenario type.
MetricRow evaluate_map(const ExperimentConfig& cfg, const Scene& scene, const PowerMap& map);

struct Evaluation {
  std::vector<MetricRow> rows;
  std::string csv;
  std::string table;
};

std::string metrics_csv(const std::vector<MetricRow>& rows);
/// Aggregate "mean (std)" table, one row per method in the order given.
std::string aggregate_table(const ExperimentConfig& cfg, const std::vector<MetricRow>& rows);

/// Writes metrics.csv and summary.md from the maps on disk.
Evaluation cmd_evaluate(const ExperimentConfig& cfg, const Log& log = {});

struct ForwardValidation {
  std::vector<double> nmse;
  double mean = 0.0;
  double stddev = 0.0;
  double worst = 0.0;
  std::uint64_t worst_seed = 0;
  bool passed = false;
};

inline constexpr double kForwardNmseBound = 1e-12;

/// Random on-grid impulse scenes: synthesize_rf against apply_forward. Writes validate_forward.csv.
ForwardValidation cmd_validate_forward(const ExperimentConfig& cfg, const Log& log = {});

/// PGM rendering of a map file.
void cmd_render(const std::filesystem::path& map_file, double dynamic_range_db, const std::filesystem::path& output);

/// simulate, beamform every configured method, evaluate, then write manifest.json.
Evaluation cmd_run_all(const ExperimentConfig& cfg, const Log& log = {});

/// Runs fn(r) for r = 1..count on up to `workers` threads; rethrows the first failure.
void for_each_replica(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace pam::harness
