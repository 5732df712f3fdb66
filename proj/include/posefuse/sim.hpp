#pragma once

#include <cstdint>
#include <vector>

#include "posefuse/lie.hpp"
#include "posefuse/rng.hpp"
#include "posefuse/traj_io.hpp"
#include "posefuse/uncertainty.hpp"

namespace posefuse {

enum class TrajectoryKind { kCircle, kFigureEight, kStraight, kRandomWalk };

// Synthetic ground-truth generator. step_count is the number of poses
// emitted; a trajectory of step_count poses contains step_count - 1 motions,
// each bounded by step_length (m) and turn_rate (rad). Deterministic in seed.
struct TrajectoryGenerator {
  TrajectoryKind kind = TrajectoryKind::kCircle;
  int step_count = 100;
  double step_length = 0.05;  // m per motion
  double turn_rate = 0.0;     // rad per motion, about body z
  std::uint64_t seed = 0;
  double rate_hz = 30.0;      // timestamp spacing
};

// Noise model standing in for a pose-regression branch: zero-mean Gaussian
// tangent noise with per-axis sigmas plus a constant bias, and a covariance
// *report* that may be mis-scaled (reported sigma = reported_scale * true
// sigma) to emulate over/under-confident estimators.
struct EstimatorNoiseModel {
  double sigma_trans = 0.0;     // m, per axis
  double sigma_rot = 0.0;       // rad, per axis
  double reported_scale = 1.0;  // > 0
  TangentPose bias;
  std::uint64_t seed = 0;
};

// One tangent draw: translation components sigma_trans * N(0,1), rotation
// components sigma_rot * N(0,1). Draw order fixed (rho.x..z then phi.x..z) so
// streams are reproducible.
TangentPose sample_tangent(Rng& rng, double sigma_trans, double sigma_rot);

Trajectory generate_truth(const TrajectoryGenerator& gen);

// Per-frame absolute measurements: mean = oplus(truth_t, bias + noise),
// reported covariance = (reported_scale * sigma)^2 per block. One measurement
// per truth record, in order.
std::vector<PoseGaussian> emit_absolute(const Trajectory& truth,
                                        const EstimatorNoiseModel& model);

// Per-frame relative controls for t = 1..N-1: the true frame-to-frame motion
// perturbed by bias + noise in the tangent, reported covariance as above.
std::vector<PoseGaussian> emit_relative(const Trajectory& truth,
                                        const EstimatorNoiseModel& model);

// Open-loop integration of the control means from `initial`. Produces
// controls.size() + 1 poses. `timestamps`, when non-empty, must have one
// entry per produced pose; otherwise pose k gets timestamp k.
Trajectory dead_reckon(const GroupPose& initial,
                       const std::vector<PoseGaussian>& controls,
                       const std::vector<double>& timestamps = {});

}  // namespace posefuse
