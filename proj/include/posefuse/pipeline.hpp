#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "posefuse/sim.hpp"

namespace posefuse {

// Scenario-of-record: generator settings, both estimator noise models, and
// Monte-Carlo batch size. Sub-seeds for truth and the two estimator streams
// are derived from `seed` with role tags, so one seed pins the whole run.
struct ScenarioConfig {
  TrajectoryGenerator generator;
  EstimatorNoiseModel absolute;
  EstimatorNoiseModel relative;
  int run_count = 1;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool turn_rate_given = false;
};

// Flat "key = value" text, '#' comments. Unknown keys are errors naming the
// key. See README for the key list.
ScenarioConfig parse_scenario_text(std::istream& in);
ScenarioConfig load_scenario(const std::string& path);

struct SimulateOptions {
  std::string config_path;  // empty: built-in defaults
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<std::string> out_dir;
};

// Writes truth_NNN.tum, abs_NNN.tumcov, rel_NNN.tumcov per run.
void cmd_simulate(const SimulateOptions& options, std::ostream& log);

enum class FuseMode { kEkf, kAprOnly, kDeadReckon };

struct FuseOptions {
  std::string abs_path;
  std::string rel_path;
  std::string out_path;
  FuseMode mode = FuseMode::kEkf;
  std::string report_path;  // empty: no step report written
};

void cmd_fuse(const FuseOptions& options, std::ostream& log);

struct EvalOptions {
  std::string estimate_path;
  std::string truth_path;
  std::string dump_path;  // empty: dump to `log` after the summary
};

void cmd_eval(const EvalOptions& options, std::ostream& log);

// Runs the named verification suite ("lie", "losses", "filter", "all").
// Returns 0 when every property passes, the check-failure exit code
// otherwise.
int cmd_check(const std::string& suite, std::ostream& log);

}  // namespace posefuse
