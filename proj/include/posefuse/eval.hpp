#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "posefuse/traj_io.hpp"
#include "posefuse/uncertainty.hpp"

namespace posefuse {

// Per-frame pose errors plus the usual summary statistics. The per-frame
// lists are kept so downstream tooling can recompute anything without
// re-running the pipeline.
struct ErrorReport {
  std::vector<double> trans_errors;    // m
  std::vector<double> rot_errors_deg;  // [0, 180]
  double median_trans = 0.0;
  double mean_trans = 0.0;
  double median_rot_deg = 0.0;
  double mean_rot_deg = 0.0;
  std::optional<double> nees_mean;

  // "0.18m, 6.75°" style: median translation and rotation.
  std::string summary() const;
};

// Kept out of ErrorReport so callers can take medians/means of arbitrary
// derived lists the same way the report does.
double median(std::vector<double> values);
double mean(const std::vector<double>& values);

// Frame-wise errors between an estimate and ground truth. Trajectories must
// have equal length and timestamps matching within 1e-6 s. Translation error
// is the Euclidean gap; rotation error is the geodesic angle
// 2*acos(|<q1,q2>|), reported in degrees.
ErrorReport pose_errors(const Trajectory& estimate, const Trajectory& truth);

// Normalized estimation error squared: e^T Sigma^{-1} e with
// e = truth ominus estimate, per frame. A calibrated 6-DOF filter gives
// chi-square(6) values with mean 6.
struct NeesReport {
  std::vector<double> per_frame;
  double mean = 0.0;
};
NeesReport nees(const std::vector<PoseGaussian>& estimates,
                const Trajectory& truth);

// Side-by-side method comparison; the machine block mirrors the text table
// value for value.
struct ComparisonTable {
  std::string text;
  std::string machine;
};
ComparisonTable compare_methods(
    const std::vector<std::pair<std::string, ErrorReport>>& reports);

// Plot-friendly dump: one "frame" line per record (t, position, errors),
// a summary block, and a metadata line naming the rotation metric.
std::string render_eval_dump(const Trajectory& estimate,
                             const ErrorReport& report);

}  // namespace posefuse
