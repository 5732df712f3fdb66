#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "posefuse/errors.hpp"
#include "posefuse/pipeline.hpp"

namespace {

int dispatch(const CLI::App& app, const posefuse::SimulateOptions& sim_opts,
             const posefuse::FuseOptions& fuse_opts,
             const posefuse::EvalOptions& eval_opts,
             const std::string& check_suite) {
  using posefuse::ExitCode;
  if (app.got_subcommand("simulate")) {
    posefuse::cmd_simulate(sim_opts, std::cout);
  } else if (app.got_subcommand("fuse")) {
    posefuse::cmd_fuse(fuse_opts, std::cout);
  } else if (app.got_subcommand("eval")) {
    posefuse::cmd_eval(eval_opts, std::cout);
  } else if (app.got_subcommand("check")) {
    return posefuse::cmd_check(check_suite, std::cout);
  }
  return static_cast<int>(ExitCode::kOk);
}

}  // namespace

int main(int argc, char** argv) {
  using posefuse::ExitCode;

  CLI::App app{"pose fusion pipeline: simulate estimator streams, fuse them "
               "with a manifold Kalman filter, evaluate trajectories, and run "
               "the numerical verification suites"};
  app.require_subcommand(1);

  posefuse::SimulateOptions sim_opts;
  CLI::App* sim = app.add_subcommand(
      "simulate", "generate truth + absolute/relative estimator streams");
  sim->add_option("--config", sim_opts.config_path,
                  "scenario file (key = value lines)");
  std::optional<std::uint64_t> sim_seed;
  std::optional<int> sim_runs;
  std::optional<std::string> sim_out;
  sim->add_option("--seed", sim_seed, "override scenario seed");
  sim->add_option("--runs", sim_runs, "override Monte-Carlo run count");
  sim->add_option("--out", sim_out, "output directory");

  posefuse::FuseOptions fuse_opts;
  CLI::App* fuse = app.add_subcommand(
      "fuse", "integrate estimator streams into one trajectory");
  fuse->add_option("abs", fuse_opts.abs_path, "absolute measurement stream")
      ->required();
  fuse->add_option("rel", fuse_opts.rel_path, "relative measurement stream")
      ->required();
  fuse->add_option("--out", fuse_opts.out_path, "fused trajectory path")
      ->required();
  std::string mode = "ekf";
  fuse->add_option("--mode", mode, "ekf | apr-only | dead-reckon")
      ->check(CLI::IsMember({"ekf", "apr-only", "dead-reckon"}));
  fuse->add_option("--report", fuse_opts.report_path,
                   "per-step filter report path");

  posefuse::EvalOptions eval_opts;
  CLI::App* eval = app.add_subcommand(
      "eval", "compare an estimated trajectory against ground truth");
  eval->add_option("estimate", eval_opts.estimate_path, "estimate file")
      ->required();
  eval->add_option("truth", eval_opts.truth_path, "ground-truth file")
      ->required();
  eval->add_option("--dump", eval_opts.dump_path,
                   "write the per-frame dump to this path instead of stdout");

  std::string check_suite = "all";
  CLI::App* check = app.add_subcommand(
      "check", "run the numerical verification suites");
  check->add_option("suite", check_suite, "lie | losses | filter | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kConfigError);
  }

  if (sim_seed) sim_opts.seed = sim_seed;
  if (sim_runs) sim_opts.runs = sim_runs;
  if (sim_out) sim_opts.out_dir = sim_out;
  if (mode == "apr-only") {
    fuse_opts.mode = posefuse::FuseMode::kAprOnly;
  } else if (mode == "dead-reckon") {
    fuse_opts.mode = posefuse::FuseMode::kDeadReckon;
  } else {
    fuse_opts.mode = posefuse::FuseMode::kEkf;
  }
  (void)sim;
  (void)fuse;
  (void)eval;
  (void)check;

  try {
    return dispatch(app, sim_opts, fuse_opts, eval_opts, check_suite);
  } catch (const posefuse::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kConfigError);
  } catch (const posefuse::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kIoError);
  } catch (const posefuse::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kNumericalError);
  }
}
