#include "posefuse/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "posefuse/checks.hpp"
#include "posefuse/ekf.hpp"
#include "posefuse/errors.hpp"
#include "posefuse/eval.hpp"
#include "posefuse/traj_io.hpp"

namespace posefuse {

namespace {

constexpr double kAlignTol = 1e-6;  // s

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double_field(const std::string& value, const std::string& key) {
  double out = 0.0;
  const char* b = value.data();
  const char* e = b + value.size();
  const auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || ptr != e || !std::isfinite(out)) {
    throw ConfigError("invalid value for '" + key + "': " + value);
  }
  return out;
}

std::uint64_t parse_u64_field(const std::string& value,
                              const std::string& key) {
  std::uint64_t out = 0;
  const char* b = value.data();
  const char* e = b + value.size();
  const auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || ptr != e) {
    throw ConfigError("invalid value for '" + key + "': " + value);
  }
  return out;
}

int parse_int_field(const std::string& value, const std::string& key) {
  int out = 0;
  const char* b = value.data();
  const char* e = b + value.size();
  const auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || ptr != e) {
    throw ConfigError("invalid value for '" + key + "': " + value);
  }
  return out;
}

TangentPose parse_bias_field(const std::string& value,
                             const std::string& key) {
  std::istringstream iss(value);
  std::vector<double> nums;
  std::string tok;
  while (iss >> tok) nums.push_back(parse_double_field(tok, key));
  if (nums.size() != 6) {
    throw ConfigError("invalid value for '" + key +
                      "': expected 6 numbers, got " +
                      std::to_string(nums.size()));
  }
  Vector6d v;
  for (int i = 0; i < 6; ++i) v[i] = nums[i];
  return TangentPose(v);
}

TrajectoryKind parse_kind(const std::string& value) {
  if (value == "circle") return TrajectoryKind::kCircle;
  if (value == "figure-eight") return TrajectoryKind::kFigureEight;
  if (value == "straight") return TrajectoryKind::kStraight;
  if (value == "random-walk") return TrajectoryKind::kRandomWalk;
  throw ConfigError("invalid value for 'kind': " + value +
                    " (expected circle|figure-eight|straight|random-walk)");
}

void apply_key(ScenarioConfig& config, const std::string& key,
               const std::string& value) {
  if (key == "kind") {
    config.generator.kind = parse_kind(value);
  } else if (key == "steps") {
    config.generator.step_count = parse_int_field(value, key);
  } else if (key == "step_length") {
    config.generator.step_length = parse_double_field(value, key);
  } else if (key == "turn_rate") {
    config.generator.turn_rate = parse_double_field(value, key);
    config.turn_rate_given = true;
  } else if (key == "rate_hz") {
    config.generator.rate_hz = parse_double_field(value, key);
  } else if (key == "seed") {
    config.seed = parse_u64_field(value, key);
  } else if (key == "runs") {
    config.run_count = parse_int_field(value, key);
  } else if (key == "out") {
    config.out_dir = value;
  } else if (key == "abs.sigma_trans") {
    config.absolute.sigma_trans = parse_double_field(value, key);
  } else if (key == "abs.sigma_rot") {
    config.absolute.sigma_rot = parse_double_field(value, key);
  } else if (key == "abs.reported_scale") {
    config.absolute.reported_scale = parse_double_field(value, key);
  } else if (key == "abs.bias") {
    config.absolute.bias = parse_bias_field(value, key);
  } else if (key == "rel.sigma_trans") {
    config.relative.sigma_trans = parse_double_field(value, key);
  } else if (key == "rel.sigma_rot") {
    config.relative.sigma_rot = parse_double_field(value, key);
  } else if (key == "rel.reported_scale") {
    config.relative.reported_scale = parse_double_field(value, key);
  } else if (key == "rel.bias") {
    config.relative.bias = parse_bias_field(value, key);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void finalize(ScenarioConfig& config) {
  if (config.run_count < 1) {
    throw ConfigError("invalid value for 'runs': must be >= 1");
  }
  if (!config.turn_rate_given) {
    // One full revolution over the trajectory (two opposite half-revolution
    // loops for the figure eight); straight/random-walk default to 0.
    const int motions = std::max(1, config.generator.step_count - 1);
    switch (config.generator.kind) {
      case TrajectoryKind::kCircle:
        config.generator.turn_rate = 2.0 * M_PI / motions;
        break;
      case TrajectoryKind::kFigureEight:
        config.generator.turn_rate = 4.0 * M_PI / motions;
        break;
      default:
        config.generator.turn_rate = 0.0;
    }
  }
}

std::string run_suffix(int run) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", run);
  return buf;
}

Trajectory gaussians_to_trajectory(const std::vector<PoseGaussian>& seq,
                                   const std::vector<double>& timestamps) {
  Trajectory traj;
  traj.records.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    TrajectoryRecord rec;
    rec.timestamp = timestamps[i];
    rec.pose = seq[i].mean;
    rec.covariance = seq[i].covariance;
    traj.records.push_back(std::move(rec));
  }
  return traj;
}

PoseGaussian record_measurement(const TrajectoryRecord& rec,
                                const std::string& stream) {
  if (!rec.covariance.has_value()) {
    throw ConfigError("fuse: " + stream +
                      " stream must carry covariances (10-column format)");
  }
  return {rec.pose, *rec.covariance, Role::kMeasurement};
}

void write_report_header(std::ofstream& out) {
  out << "# columns: step t applied r0 r1 r2 r3 r4 r5 trace_prior "
         "trace_post\n";
}

void write_report_line(std::ofstream& out, int step_no, double t,
                       const KalmanStepReport& report) {
  if (!out.is_open()) return;
  out << "step " << step_no << ' ';
  char ts[64];
  std::snprintf(ts, sizeof(ts), "%.9f", t);
  out << ts << ' ' << (report.measurement_applied ? 1 : 0);
  const Vector6d r = report.residual.vec();
  for (int i = 0; i < 6; ++i) out << ' ' << format_double(r[i]);
  out << ' ' << format_double(report.prior.covariance.trace()) << ' '
      << format_double(report.posterior.covariance.trace()) << '\n';
}

}  // namespace

ScenarioConfig parse_scenario_text(std::istream& in) {
  ScenarioConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key or value");
    }
    apply_key(config, key, value);
  }
  finalize(config);
  return config;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config " + path);
  }
  return parse_scenario_text(in);
}

void cmd_simulate(const SimulateOptions& options, std::ostream& log) {
  ScenarioConfig config;
  if (!options.config_path.empty()) {
    config = load_scenario(options.config_path);
  } else {
    finalize(config);
  }
  if (options.seed.has_value()) config.seed = *options.seed;
  if (options.runs.has_value()) config.run_count = *options.runs;
  if (options.out_dir.has_value()) config.out_dir = *options.out_dir;
  if (config.run_count < 1) {
    throw ConfigError("invalid value for 'runs': must be >= 1");
  }

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + config.out_dir + ": " +
                  ec.message());
  }

  TrajectoryGenerator gen = config.generator;
  gen.seed = derive_seed(config.seed, "truth");
  const Trajectory truth = generate_truth(gen);
  std::vector<double> timestamps;
  timestamps.reserve(truth.size());
  for (const TrajectoryRecord& rec : truth.records) {
    timestamps.push_back(rec.timestamp);
  }
  const std::vector<double> later(timestamps.begin() + 1, timestamps.end());

  for (int run = 0; run < config.run_count; ++run) {
    EstimatorNoiseModel abs_model = config.absolute;
    abs_model.seed = derive_seed(config.seed, "absolute", run);
    EstimatorNoiseModel rel_model = config.relative;
    rel_model.seed = derive_seed(config.seed, "relative", run);

    const std::vector<PoseGaussian> abs_meas = emit_absolute(truth, abs_model);
    const std::vector<PoseGaussian> rel_meas = emit_relative(truth, rel_model);

    const std::string suffix = run_suffix(run);
    const fs::path dir(config.out_dir);
    const std::string truth_path = (dir / ("truth_" + suffix + ".tum")).string();
    const std::string abs_path = (dir / ("abs_" + suffix + ".tumcov")).string();
    const std::string rel_path = (dir / ("rel_" + suffix + ".tumcov")).string();

    save_tum(truth, truth_path);
    save_tum_cov(gaussians_to_trajectory(abs_meas, timestamps), abs_path);
    save_tum_cov(gaussians_to_trajectory(rel_meas, later), rel_path);
    log << "run " << suffix << ": wrote " << truth_path << ", " << abs_path
        << ", " << rel_path << "\n";
  }
}

void cmd_fuse(const FuseOptions& options, std::ostream& log) {
  const Trajectory abs = load_trajectory(options.abs_path);
  const Trajectory rel = load_trajectory(options.rel_path);
  if (rel.empty()) {
    throw ConfigError("fuse: relative stream is empty");
  }
  const bool needs_abs = options.mode != FuseMode::kDeadReckon;
  if (needs_abs && abs.empty()) {
    throw ConfigError("fuse: no absolute measurements");
  }

  std::ofstream report_out;
  if (!options.report_path.empty()) {
    report_out.open(options.report_path);
    if (!report_out) {
      throw IoError("cannot write " + options.report_path);
    }
  }

  if (options.mode == FuseMode::kAprOnly) {
    for (const TrajectoryRecord& rec : abs.records) {
      record_measurement(rec, "absolute");  // validates covariance presence
    }
    save_tum_cov(abs, options.out_path);
    if (report_out.is_open()) {
      report_out << "# mode apr-only: measurements passed through, no filter "
                    "steps\n";
    }
    log << "apr-only: wrote " << abs.size() << " poses to "
        << options.out_path << "\n";
    return;
  }

  // ekf and dead-reckon share the stepping skeleton; dead-reckon never
  // corrects.
  const bool correcting = options.mode == FuseMode::kEkf;
  EkfState state;
  Trajectory fused;
  std::size_t ai = 0;

  if (!abs.empty()) {
    if (abs.records[0].timestamp > rel.records[0].timestamp - kAlignTol) {
      throw ConfigError(
          "fuse: no absolute measurement precedes the first relative record "
          "(first absolute at t=" +
          std::to_string(abs.records[0].timestamp) + ")");
    }
    if (correcting) {
      initialize(state, record_measurement(abs.records[0], "absolute"));
    } else {
      // Dead-reckoning starts from the first absolute pose; a missing
      // covariance degrades to the floor.
      const Matrix6d cov = abs.records[0].covariance.value_or(
          BlockDiagonalCovariance(0.0, 0.0).to_dense());
      initialize(state,
                 PoseGaussian(abs.records[0].pose, cov, Role::kMeasurement));
    }
    TrajectoryRecord rec;
    rec.timestamp = abs.records[0].timestamp;
    rec.pose = state.estimate.mean;
    rec.covariance = state.estimate.covariance;
    fused.records.push_back(std::move(rec));
    ai = 1;
  } else {
    initialize(state,
               PoseGaussian(GroupPose(),
                            BlockDiagonalCovariance(0.0, 0.0).to_dense(),
                            Role::kMeasurement));
  }

  if (report_out.is_open()) write_report_header(report_out);

  int step_no = 0;
  for (const TrajectoryRecord& rel_rec : rel.records) {
    Matrix6d control_cov;
    if (rel_rec.covariance.has_value()) {
      control_cov = *rel_rec.covariance;
    } else if (!correcting) {
      control_cov = BlockDiagonalCovariance(0.0, 0.0).to_dense();
    } else {
      throw ConfigError(
          "fuse: relative stream must carry covariances (10-column format)");
    }
    const PoseGaussian control(rel_rec.pose, control_cov, Role::kControl);

    std::optional<PoseGaussian> measurement;
    if (correcting) {
      if (ai < abs.size() &&
          abs.records[ai].timestamp < rel_rec.timestamp - kAlignTol) {
        throw ConfigError(
            "fuse: absolute record at t=" +
            std::to_string(abs.records[ai].timestamp) +
            " matches no relative record");
      }
      if (ai < abs.size() &&
          std::abs(abs.records[ai].timestamp - rel_rec.timestamp) <=
              kAlignTol) {
        measurement = record_measurement(abs.records[ai], "absolute");
        ++ai;
      }
    }

    const KalmanStepReport report = step(state, control, measurement);
    ++step_no;
    write_report_line(report_out, step_no, rel_rec.timestamp, report);

    TrajectoryRecord rec;
    rec.timestamp = rel_rec.timestamp;
    rec.pose = state.estimate.mean;
    rec.covariance = state.estimate.covariance;
    fused.records.push_back(std::move(rec));
  }

  if (correcting && ai < abs.size()) {
    throw ConfigError("fuse: absolute record at t=" +
                      std::to_string(abs.records[ai].timestamp) +
                      " lies beyond the relative stream");
  }

  save_tum_cov(fused, options.out_path);
  log << (correcting ? "ekf" : "dead-reckon") << ": wrote " << fused.size()
      << " poses to " << options.out_path << "\n";
}

void cmd_eval(const EvalOptions& options, std::ostream& log) {
  const Trajectory estimate = load_trajectory(options.estimate_path);
  const Trajectory truth = load_trajectory(options.truth_path);
  const ErrorReport report = pose_errors(estimate, truth);

  char buf[64];
  log << "frames " << estimate.size() << "\n";
  std::snprintf(buf, sizeof(buf), "%.9f", report.median_trans);
  log << "median_trans_m " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.9f", report.mean_trans);
  log << "mean_trans_m " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.9f", report.median_rot_deg);
  log << "median_rot_deg " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.9f", report.mean_rot_deg);
  log << "mean_rot_deg " << buf << "\n";
  log << "headline " << report.summary() << "\n";

  const std::string dump = render_eval_dump(estimate, report);
  if (options.dump_path.empty()) {
    log << dump;
  } else {
    std::ofstream out(options.dump_path);
    if (!out) {
      throw IoError("cannot write " + options.dump_path);
    }
    out << dump;
    log << "dump " << options.dump_path << "\n";
  }
}

int cmd_check(const std::string& suite, std::ostream& log) {
  std::vector<CheckResult> results;
  const bool all = suite == "all";
  bool known = all;
  if (all || suite == "lie") {
    known = true;
    const auto r = run_lie_checks();
    results.insert(results.end(), r.begin(), r.end());
  }
  if (all || suite == "losses") {
    known = true;
    const auto r = run_loss_checks();
    results.insert(results.end(), r.begin(), r.end());
  }
  if (all || suite == "filter") {
    known = true;
    const auto r = run_filter_checks();
    results.insert(results.end(), r.begin(), r.end());
  }
  if (!known) {
    throw ConfigError("unknown check suite '" + suite +
                      "' (expected lie|losses|filter|all)");
  }

  int passed = 0;
  for (const CheckResult& result : results) {
    log << (result.passed ? "[ ok ]" : "[FAIL]") << ' ' << result.name << " ("
        << result.cases << " cases) " << result.detail << "\n";
    if (result.passed) ++passed;
  }
  log << "passed " << passed << "/" << results.size() << " properties\n";
  return passed == static_cast<int>(results.size())
             ? 0
             : static_cast<int>(ExitCode::kCheckFailure);
}

}  // namespace posefuse
