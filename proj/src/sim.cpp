#include "posefuse/sim.hpp"

#include <cmath>

#include "posefuse/errors.hpp"

namespace posefuse {

namespace {

constexpr double kInvSqrt3 = 0.57735026918962576;

void validate(const EstimatorNoiseModel& model) {
  if (model.sigma_trans < 0.0 || model.sigma_rot < 0.0) {
    throw ConfigError("noise model: sigmas must be non-negative");
  }
  if (!(model.reported_scale > 0.0)) {
    throw ConfigError("noise model: reported_scale must be positive");
  }
}

BlockDiagonalCovariance reported_covariance(const EstimatorNoiseModel& model) {
  const double st = model.reported_scale * model.sigma_trans;
  const double sr = model.reported_scale * model.sigma_rot;
  return {st * st, sr * sr};
}

}  // namespace

TangentPose sample_tangent(Rng& rng, double sigma_trans, double sigma_rot) {
  TangentPose xi;
  for (int i = 0; i < 3; ++i) xi.rho[i] = sigma_trans * rng.gaussian();
  for (int i = 0; i < 3; ++i) xi.phi[i] = sigma_rot * rng.gaussian();
  return xi;
}

Trajectory generate_truth(const TrajectoryGenerator& gen) {
  if (gen.step_count < 2) {
    throw ConfigError("generate_truth: step_count must be >= 2");
  }
  if (!(gen.rate_hz > 0.0)) {
    throw ConfigError("generate_truth: rate_hz must be positive");
  }

  const int motions = gen.step_count - 1;
  Rng rng(gen.seed);

  Trajectory traj;
  traj.records.reserve(gen.step_count);
  GroupPose pose;  // start at identity
  for (int k = 0; k < gen.step_count; ++k) {
    TrajectoryRecord rec;
    rec.timestamp = static_cast<double>(k) / gen.rate_hz;
    rec.pose = pose;
    traj.records.push_back(std::move(rec));
    if (k == motions) break;

    TangentPose motion;
    switch (gen.kind) {
      case TrajectoryKind::kStraight:
        motion.rho.x() = gen.step_length;
        break;
      case TrajectoryKind::kCircle:
        motion.rho.x() = gen.step_length;
        motion.phi.z() = gen.turn_rate;
        break;
      case TrajectoryKind::kFigureEight:
        motion.rho.x() = gen.step_length;
        // Turn one way for the first half of the motions, the other way for
        // the rest, tracing two opposite loops.
        motion.phi.z() = (2 * k < motions) ? gen.turn_rate : -gen.turn_rate;
        break;
      case TrajectoryKind::kRandomWalk:
        // Per-component uniform bounds chosen so the full vector norm never
        // exceeds step_length / turn_rate.
        for (int i = 0; i < 3; ++i) {
          motion.rho[i] = rng.uniform(-gen.step_length * kInvSqrt3,
                                      gen.step_length * kInvSqrt3);
        }
        for (int i = 0; i < 3; ++i) {
          motion.phi[i] = rng.uniform(-gen.turn_rate * kInvSqrt3,
                                      gen.turn_rate * kInvSqrt3);
        }
        break;
    }
    pose = oplus(pose, motion);
  }
  return traj;
}

std::vector<PoseGaussian> emit_absolute(const Trajectory& truth,
                                        const EstimatorNoiseModel& model) {
  validate(model);
  Rng rng(model.seed);
  const BlockDiagonalCovariance cov = reported_covariance(model);
  std::vector<PoseGaussian> out;
  out.reserve(truth.size());
  for (const TrajectoryRecord& rec : truth.records) {
    const TangentPose noise =
        sample_tangent(rng, model.sigma_trans, model.sigma_rot);
    out.emplace_back(oplus(rec.pose, model.bias + noise), cov,
                     Role::kMeasurement);
  }
  return out;
}

std::vector<PoseGaussian> emit_relative(const Trajectory& truth,
                                        const EstimatorNoiseModel& model) {
  validate(model);
  if (truth.size() < 2) {
    throw ConfigError("emit_relative: need at least 2 truth poses");
  }
  Rng rng(model.seed);
  const BlockDiagonalCovariance cov = reported_covariance(model);
  std::vector<PoseGaussian> out;
  out.reserve(truth.size() - 1);
  for (std::size_t t = 1; t < truth.size(); ++t) {
    const TangentPose u = relative_from_absolute(truth.records[t - 1].pose,
                                                 truth.records[t].pose);
    const TangentPose noise =
        sample_tangent(rng, model.sigma_trans, model.sigma_rot);
    out.emplace_back(exp(u + model.bias + noise), cov, Role::kControl);
  }
  return out;
}

Trajectory dead_reckon(const GroupPose& initial,
                       const std::vector<PoseGaussian>& controls,
                       const std::vector<double>& timestamps) {
  if (controls.empty()) {
    throw ConfigError("dead_reckon: need at least one control");
  }
  if (!timestamps.empty() && timestamps.size() != controls.size() + 1) {
    throw ConfigError("dead_reckon: timestamps must cover initial pose plus "
                      "one per control");
  }
  Trajectory traj;
  traj.records.reserve(controls.size() + 1);
  GroupPose pose = initial;
  for (std::size_t k = 0; k <= controls.size(); ++k) {
    TrajectoryRecord rec;
    rec.timestamp =
        timestamps.empty() ? static_cast<double>(k) : timestamps[k];
    rec.pose = pose;
    traj.records.push_back(std::move(rec));
    if (k < controls.size()) {
      pose = compose(pose, controls[k].mean);
    }
  }
  return traj;
}

}  // namespace posefuse
