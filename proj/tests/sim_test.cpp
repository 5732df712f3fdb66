#include "posefuse/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "posefuse/errors.hpp"
#include "posefuse/lie.hpp"
#include "posefuse/rng.hpp"
#include "test_util.hpp"

namespace posefuse {
namespace {

using testing::pose_gap;

TrajectoryGenerator straight_gen(int poses, double step_length) {
  TrajectoryGenerator gen;
  gen.kind = TrajectoryKind::kStraight;
  gen.step_count = poses;
  gen.step_length = step_length;
  gen.turn_rate = 0.0;
  gen.seed = 1;
  return gen;
}

TEST(GenerateTruth, StraightLineWalksTheXAxis) {
  const Trajectory traj = generate_truth(straight_gen(10, 1.0));
  ASSERT_EQ(traj.size(), 10u);
  for (int i = 0; i < 10; ++i) {
    const TrajectoryRecord& rec = traj.records[i];
    EXPECT_DOUBLE_EQ(rec.pose.translation.x(), static_cast<double>(i));
    EXPECT_DOUBLE_EQ(rec.pose.translation.y(), 0.0);
    EXPECT_DOUBLE_EQ(rec.pose.translation.z(), 0.0);
    EXPECT_LE(pose_gap(GroupPose(rec.pose.rotation, Vector3d::Zero()),
                       GroupPose()),
              0.0);
  }
}

TEST(GenerateTruth, TimestampsFollowTheRate) {
  TrajectoryGenerator gen = straight_gen(5, 1.0);
  gen.rate_hz = 10.0;
  const Trajectory traj = generate_truth(gen);
  for (int i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(traj.records[i].timestamp, i / 10.0);
  }
}

TEST(GenerateTruth, CircleClosesAfterFullTurn) {
  // N motions of (step, turn = 2*pi/N) return to the start pose.
  const int n = 36;
  TrajectoryGenerator gen;
  gen.kind = TrajectoryKind::kCircle;
  gen.step_count = n + 1;
  gen.step_length = 0.5;
  gen.turn_rate = 2.0 * M_PI / n;
  gen.seed = 1;
  const Trajectory traj = generate_truth(gen);
  ASSERT_EQ(traj.size(), static_cast<std::size_t>(n + 1));
  EXPECT_LE(pose_gap(traj.records.back().pose, traj.records.front().pose),
            1e-9);
  // Interior poses are genuinely away from the start.
  EXPECT_GT(
      pose_gap(traj.records[n / 2].pose, traj.records.front().pose), 0.5);
}

TEST(GenerateTruth, FigureEightReversesTheTurnHalfway) {
  TrajectoryGenerator gen;
  gen.kind = TrajectoryKind::kFigureEight;
  gen.step_count = 41;  // 40 motions: 20 one way, 20 the other
  gen.step_length = 0.3;
  gen.turn_rate = 2.0 * M_PI / 20.0;
  gen.seed = 1;
  const Trajectory traj = generate_truth(gen);
  ASSERT_EQ(traj.size(), 41u);

  const TangentPose first =
      ominus(traj.records[1].pose, traj.records[0].pose);
  const TangentPose last =
      ominus(traj.records[40].pose, traj.records[39].pose);
  EXPECT_NEAR(first.phi.z(), gen.turn_rate, 1e-12);
  EXPECT_NEAR(last.phi.z(), -gen.turn_rate, 1e-12);
}

TEST(GenerateTruth, RandomWalkIsSeededAndBounded) {
  TrajectoryGenerator gen;
  gen.kind = TrajectoryKind::kRandomWalk;
  gen.step_count = 50;
  gen.step_length = 0.2;
  gen.turn_rate = 0.3;
  gen.seed = 99;
  const Trajectory a = generate_truth(gen);
  const Trajectory b = generate_truth(gen);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(pose_gap(a.records[i].pose, b.records[i].pose), 0.0);
    EXPECT_EQ(a.records[i].timestamp, b.records[i].timestamp);
  }
  gen.seed = 100;
  const Trajectory c = generate_truth(gen);
  EXPECT_GT(pose_gap(a.records.back().pose, c.records.back().pose), 1e-6);

  for (std::size_t i = 1; i < a.size(); ++i) {
    const TangentPose motion =
        ominus(a.records[i].pose, a.records[i - 1].pose);
    EXPECT_LE(motion.rho.norm(), gen.step_length * (1 + 1e-9));
    EXPECT_LE(motion.phi.norm(), gen.turn_rate * (1 + 1e-9));
  }
}

TEST(GenerateTruth, RejectsDegenerateConfigs) {
  EXPECT_THROW(generate_truth(straight_gen(1, 1.0)), ConfigError);
  TrajectoryGenerator gen = straight_gen(10, 1.0);
  gen.rate_hz = 0.0;
  EXPECT_THROW(generate_truth(gen), ConfigError);
}

TEST(EmitAbsolute, NoiselessModelReportsTruthWithFloorCovariance) {
  const Trajectory truth = generate_truth(straight_gen(8, 0.5));
  EstimatorNoiseModel model;  // all-zero noise, unit scale
  const std::vector<PoseGaussian> zs = emit_absolute(truth, model);
  ASSERT_EQ(zs.size(), truth.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    EXPECT_LE(pose_gap(zs[i].mean, truth.records[i].pose), 1e-15);
    EXPECT_NEAR(zs[i].covariance(0, 0), kVarianceFloor, 1e-15);
    EXPECT_EQ(zs[i].role, Role::kMeasurement);
  }
}

TEST(EmitAbsolute, NoiseMatchesTheRequestedSigmas) {
  TrajectoryGenerator gen = straight_gen(20000, 0.01);
  const Trajectory truth = generate_truth(gen);
  EstimatorNoiseModel model;
  model.sigma_trans = 0.3;
  model.sigma_rot = 0.02;
  model.seed = 5;
  const std::vector<PoseGaussian> zs = emit_absolute(truth, model);

  double sum_sq_trans = 0.0;
  double sum_sq_rot = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const TangentPose err = ominus(zs[i].mean, truth.records[i].pose);
    sum_sq_trans += err.rho.squaredNorm();
    sum_sq_rot += err.phi.squaredNorm();
  }
  const double std_trans = std::sqrt(sum_sq_trans / (3.0 * zs.size()));
  const double std_rot = std::sqrt(sum_sq_rot / (3.0 * zs.size()));
  EXPECT_NEAR(std_trans, model.sigma_trans, 0.02 * model.sigma_trans);
  EXPECT_NEAR(std_rot, model.sigma_rot, 0.02 * model.sigma_rot);
}

TEST(EmitAbsolute, BiasShiftsEveryMeasurement) {
  const Trajectory truth = generate_truth(straight_gen(10, 0.5));
  EstimatorNoiseModel model;
  model.bias = TangentPose({0.1, -0.05, 0.02}, {0.01, 0.0, -0.01});
  const std::vector<PoseGaussian> zs = emit_absolute(truth, model);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const GroupPose expected = oplus(truth.records[i].pose, model.bias);
    EXPECT_LE(pose_gap(zs[i].mean, expected), 1e-12);
  }
}

TEST(EmitAbsolute, ReportedScaleInflatesOnlyTheReport) {
  const Trajectory truth = generate_truth(straight_gen(10, 0.5));
  EstimatorNoiseModel honest;
  honest.sigma_trans = 0.2;
  honest.sigma_rot = 0.05;
  honest.seed = 6;
  EstimatorNoiseModel inflated = honest;
  inflated.reported_scale = 2.0;

  const std::vector<PoseGaussian> a = emit_absolute(truth, honest);
  const std::vector<PoseGaussian> b = emit_absolute(truth, inflated);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(pose_gap(a[i].mean, b[i].mean), 0.0);  // same noise stream
    EXPECT_DOUBLE_EQ(b[i].covariance(0, 0), 4.0 * a[i].covariance(0, 0));
    EXPECT_DOUBLE_EQ(b[i].covariance(5, 5), 4.0 * a[i].covariance(5, 5));
  }
}

TEST(EmitRelative, NoiselessControlsReconstructTheTruth) {
  TrajectoryGenerator gen;
  gen.kind = TrajectoryKind::kCircle;
  gen.step_count = 30;
  gen.step_length = 0.4;
  gen.turn_rate = 0.2;
  gen.seed = 1;
  const Trajectory truth = generate_truth(gen);

  EstimatorNoiseModel model;  // noiseless
  const std::vector<PoseGaussian> controls = emit_relative(truth, model);
  ASSERT_EQ(controls.size(), truth.size() - 1);

  std::vector<double> stamps;
  for (const TrajectoryRecord& rec : truth.records) {
    stamps.push_back(rec.timestamp);
  }
  const Trajectory rebuilt =
      dead_reckon(truth.records.front().pose, controls, stamps);
  ASSERT_EQ(rebuilt.size(), truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    EXPECT_LE(pose_gap(rebuilt.records[i].pose, truth.records[i].pose), 1e-12);
    EXPECT_EQ(rebuilt.records[i].timestamp, truth.records[i].timestamp);
  }
}

TEST(EmitRelative, NoiseMatchesTheRequestedSigmas) {
  TrajectoryGenerator gen = straight_gen(20001, 0.01);
  const Trajectory truth = generate_truth(gen);
  EstimatorNoiseModel model;
  model.sigma_trans = 0.05;
  model.sigma_rot = 0.01;
  model.seed = 7;
  const std::vector<PoseGaussian> controls = emit_relative(truth, model);
  ASSERT_EQ(controls.size(), 20000u);

  double sum_sq_trans = 0.0;
  double sum_sq_rot = 0.0;
  for (std::size_t i = 0; i < controls.size(); ++i) {
    const GroupPose true_motion =
        compose(inverse(truth.records[i].pose), truth.records[i + 1].pose);
    const TangentPose delta =
        log(compose(inverse(true_motion), controls[i].mean));
    sum_sq_trans += delta.rho.squaredNorm();
    sum_sq_rot += delta.phi.squaredNorm();
  }
  const double std_trans = std::sqrt(sum_sq_trans / (3.0 * controls.size()));
  const double std_rot = std::sqrt(sum_sq_rot / (3.0 * controls.size()));
  EXPECT_NEAR(std_trans, model.sigma_trans, 0.02 * model.sigma_trans);
  EXPECT_NEAR(std_rot, model.sigma_rot, 0.02 * model.sigma_rot);
}

TEST(DeadReckon, IdentityControlsStayPut) {
  Rng rng(8);
  const GroupPose start = testing::random_pose(rng);
  const std::vector<PoseGaussian> controls(
      5, PoseGaussian(GroupPose(), BlockDiagonalCovariance(1e-4, 1e-6),
                      Role::kControl));
  const Trajectory traj = dead_reckon(start, controls);
  ASSERT_EQ(traj.size(), 6u);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_LE(pose_gap(traj.records[i].pose, start), 1e-15);
    EXPECT_DOUBLE_EQ(traj.records[i].timestamp, static_cast<double>(i));
  }
}

TEST(DeadReckon, ValidatesItsArguments) {
  EXPECT_THROW(dead_reckon(GroupPose(), {}), ConfigError);
  const std::vector<PoseGaussian> controls(
      3, PoseGaussian(GroupPose(), BlockDiagonalCovariance(1e-4, 1e-6),
                      Role::kControl));
  EXPECT_THROW(dead_reckon(GroupPose(), controls, {0.0, 1.0}), ConfigError);
}

}  // namespace
}  // namespace posefuse
