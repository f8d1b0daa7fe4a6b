// pam: passive acoustic mapping experiment runner.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "pam/error.hpp"
#include "pam/harness/commands.hpp"
#include "pam/harness/config.hpp"

namespace {

using namespace pam;
using namespace pam::harness;

enum ExitCode { kOk = 0, kConfig = 1, kIo = 2, kDivergence = 3, kValidationFailed = 4 };

struct Options {
  std::string config;
  std::string preset;
  std::vector<std::string> set;
  std::optional<std::size_t> replicas;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  std::optional<std::size_t> experiments;
  std::string method;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "INI config file or a run manifest (.json)");
  cmd->add_option("--preset", o.preset, "named preset used when no --config is given");
  cmd->add_option("--set", o.set, "override a setting, section.key=value (repeatable)");
  cmd->add_option("--replicas", o.replicas, "number of replicas");
  cmd->add_option("--seed", o.seed, "base seed; replica r uses seed + r");
  cmd->add_option("--workers", o.workers, "replicas run concurrently");
  cmd->add_option("--out", o.out, "output directory");
}

ExperimentConfig resolve(const Options& o) {
  if (!o.config.empty() && !o.preset.empty()) throw ConfigError("--preset", "use either --config or --preset");
  ExperimentConfig cfg = !o.config.empty() ? load_config(o.config) : preset(o.preset.empty() ? "toy" : o.preset);
  std::map<std::string, std::string> changes;
  for (const auto& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set", "expected section.key=value, got '" + kv + "'");
    changes[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (o.replicas) changes["experiment.replicas"] = std::to_string(*o.replicas);
  if (o.seed) changes["experiment.seed"] = std::to_string(*o.seed);
  if (o.workers) changes["experiment.workers"] = std::to_string(*o.workers);
  if (o.out) changes["experiment.output"] = *o.out;
  if (o.experiments) changes["experiment.validate_experiments"] = std::to_string(*o.experiments);
  return changes.empty() ? cfg : override_settings(cfg, changes);
}

void print_line(const std::string& s) { std::cout << s << '\n' << std::flush; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passive acoustic mapping: simulation, beamforming and evaluation"};
  app.require_subcommand(1);

  Options o;
  std::string map_file, output;
  double range = 40.0;

  auto* simulate = app.add_subcommand("simulate", "write scenes and RF frames for every replica");
  add_common(simulate, o);
  auto* beamform = app.add_subcommand("beamform", "reconstruct power maps with one method");
  add_common(beamform, o);
  beamform->add_option("--method", o.method, "tddas | sp | sptv | spred")->required();
  auto* evaluate = app.add_subcommand("evaluate", "metrics CSV and the aggregate table");
  add_common(evaluate, o);
  auto* validate = app.add_subcommand("validate-forward", "check the simulator against the delay operator");
  add_common(validate, o);
  validate->add_option("--experiments", o.experiments, "number of random scenes");
  auto* render = app.add_subcommand("render", "PGM image of a map file");
  render->add_option("--map", map_file, "map.pamt")->required();
  render->add_option("--range", range, "dynamic range in dB");
  render->add_option("--output", output, "output .pgm")->required();
  auto* run_all = app.add_subcommand("run-all", "simulate, beamform every method, evaluate");
  add_common(run_all, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (render->parsed()) {
      cmd_render(map_file, range, output);
      return kOk;
    }
    const ExperimentConfig cfg = resolve(o);
    if (simulate->parsed()) {
      cmd_simulate(cfg, print_line);
    } else if (beamform->parsed()) {
      Method m;
      try {
        m = method_from_string(o.method);
      } catch (const InvalidInput& e) {
        throw ConfigError("--method", e.what());
      }
      cmd_beamform(cfg, m, print_line);
    } else if (evaluate->parsed()) {
      cmd_evaluate(cfg, print_line);
    } else if (validate->parsed()) {
      const auto v = cmd_validate_forward(cfg, print_line);
      if (!v.passed) {
        std::cerr << "validate-forward failed; worst scene seed " << v.worst_seed << '\n';
        return kValidationFailed;
      }
    } else if (run_all->parsed()) {
      cmd_run_all(cfg, print_line);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const SolverDivergence& e) {
    std::cerr << "solver diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
