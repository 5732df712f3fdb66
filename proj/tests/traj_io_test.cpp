#include "posefuse/traj_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "posefuse/errors.hpp"
#include "posefuse/rng.hpp"
#include "posefuse/uncertainty.hpp"
#include "test_util.hpp"

namespace posefuse {
namespace {

using testing::pose_gap;
using testing::random_pose;

std::filesystem::path make_temp_dir(const std::string& tag) {
  const std::filesystem::path dir =
      std::filesystem::path(::testing::TempDir()) / ("posefuse_" + tag);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  ASSERT_TRUE(out.is_open()) << path;
  out << text;
}

TEST(ParseTum, ReadsTheReferenceLine) {
  std::istringstream in(
      "# trajectory\n"
      "\n"
      "0.0 1.0 2.0 3.0 0 0 0 1\n"
      "0.5 1.5 2.0 3.0 0 0 0 1\n");
  const Trajectory traj = parse_tum(in);
  ASSERT_EQ(traj.size(), 2u);
  EXPECT_DOUBLE_EQ(traj.records[0].timestamp, 0.0);
  EXPECT_DOUBLE_EQ(traj.records[0].pose.translation.x(), 1.0);
  EXPECT_DOUBLE_EQ(traj.records[0].pose.translation.y(), 2.0);
  EXPECT_DOUBLE_EQ(traj.records[0].pose.translation.z(), 3.0);
  EXPECT_LE(pose_gap(GroupPose(traj.records[0].pose.rotation, Vector3d::Zero()),
                     GroupPose()),
            0.0);
  EXPECT_FALSE(traj.records[0].covariance.has_value());
}

TEST(ParseTum, ReportsTheOffendingLineNumber) {
  std::istringstream in(
      "# header comment\n"
      "\n"
      "0.0 1.0 2.0 3.0 0 0 0\n");  // 7 fields on physical line 3
  try {
    parse_tum(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(ParseTum, RejectsMalformedStreams) {
  {
    std::istringstream in("0.0 1 2 3 0 0 0 1\n0.0 1 2 3 0 0 0 1\n");
    EXPECT_THROW(parse_tum(in), ParseError);  // non-monotone timestamps
  }
  {
    std::istringstream in("0.0 nan 2 3 0 0 0 1\n");
    EXPECT_THROW(parse_tum(in), ParseError);  // non-finite value
  }
  {
    std::istringstream in("0.0 abc 2 3 0 0 0 1\n");
    EXPECT_THROW(parse_tum(in), ParseError);  // not a number
  }
  {
    std::istringstream in("0.0 1 2 3 0 0 0 0\n");
    EXPECT_THROW(parse_tum(in), ParseError);  // degenerate quaternion
  }
}

TEST(ParseTumCov, ReadsVariancesIntoBlockCovariance) {
  std::istringstream in("0.0 1 2 3 0 0 0 1 0.04 0.0025\n");
  const Trajectory traj = parse_tum_cov(in);
  ASSERT_EQ(traj.size(), 1u);
  ASSERT_TRUE(traj.records[0].covariance.has_value());
  const Matrix6d& cov = *traj.records[0].covariance;
  EXPECT_DOUBLE_EQ(cov(0, 0), 0.04);
  EXPECT_DOUBLE_EQ(cov(4, 4), 0.0025);
  EXPECT_DOUBLE_EQ(cov(0, 1), 0.0);
}

TEST(ParseTumCov, RejectsNonPositiveVariances) {
  {
    std::istringstream in("0.0 1 2 3 0 0 0 1 0 0.0025\n");
    EXPECT_THROW(parse_tum_cov(in), ParseError);
  }
  {
    std::istringstream in("0.0 1 2 3 0 0 0 1 0.04 -1\n");
    EXPECT_THROW(parse_tum_cov(in), ParseError);
  }
  {
    std::istringstream in("0.0 1 2 3 0 0 0 1 0.04\n");  // 9 fields
    EXPECT_THROW(parse_tum_cov(in), ParseError);
  }
}

TEST(WriteTum, EmitsTheCanonicalIdentityLine) {
  Trajectory traj;
  traj.records.push_back(TrajectoryRecord{});
  std::ostringstream out;
  write_tum(traj, out);
  EXPECT_EQ(out.str(), "0.000000000 0 0 0 0 0 0 1\n");
}

TEST(WriteTum, CanonicalizesTheQuaternionSign) {
  TrajectoryRecord rec;
  rec.pose.rotation = Eigen::Quaterniond(-0.6, 0.8, 0.0, 0.0);
  Trajectory traj;
  traj.records.push_back(rec);
  std::ostringstream out;
  write_tum(traj, out);
  EXPECT_EQ(out.str(), "0.000000000 0 0 0 -0.8 -0 -0 0.6\n");

  std::istringstream in(out.str());
  const Trajectory back = parse_tum(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_LE(pose_gap(back.records[0].pose, rec.pose), 1e-15);
}

TEST(WriteTumCov, RequiresACovarianceOnEveryRecord) {
  Trajectory traj;
  traj.records.push_back(TrajectoryRecord{});
  std::ostringstream out;
  EXPECT_THROW(write_tum_cov(traj, out), IoError);
}

TEST(Roundtrip, PlainFormatReproducesRecords) {
  Rng rng(61);
  Trajectory traj;
  std::int64_t ns = 1000000;
  for (int i = 0; i < 200; ++i) {
    TrajectoryRecord rec;
    ns += 1 + static_cast<std::int64_t>(rng.uniform(0.0, 5e7));
    rec.timestamp = static_cast<double>(ns) / 1e9;
    rec.pose = random_pose(rng, 10.0, 3.0);
    traj.records.push_back(rec);
  }

  std::ostringstream out;
  write_tum(traj, out);
  std::istringstream in(out.str());
  const Trajectory back = parse_tum(in);

  ASSERT_EQ(back.size(), traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_EQ(back.records[i].timestamp, traj.records[i].timestamp);
    EXPECT_EQ((back.records[i].pose.translation -
               traj.records[i].pose.translation)
                  .cwiseAbs()
                  .maxCoeff(),
              0.0);
    EXPECT_LE(pose_gap(back.records[i].pose, traj.records[i].pose), 1e-15);
  }
}

TEST(Roundtrip, CovarianceFormatReproducesDyadicVariances) {
  Rng rng(62);
  Trajectory traj;
  std::vector<double> vt_list;
  std::vector<double> vr_list;
  for (int i = 0; i < 200; ++i) {
    TrajectoryRecord rec;
    rec.timestamp = static_cast<double>(i) / 8.0;
    rec.pose = random_pose(rng, 5.0, 3.0);
    // Dyadic variances: k / 1024 survives the per-block trace averaging
    // without rounding, so the roundtrip is bit-exact.
    const double vt = std::floor(rng.uniform(1.0, 2000.0)) / 1024.0;
    const double vr = std::floor(rng.uniform(1.0, 2000.0)) / 1024.0;
    rec.covariance = BlockDiagonalCovariance(vt, vr).to_dense();
    vt_list.push_back(vt);
    vr_list.push_back(vr);
    traj.records.push_back(rec);
  }

  std::ostringstream out;
  write_tum_cov(traj, out);
  std::istringstream in(out.str());
  const Trajectory back = parse_tum_cov(in);

  ASSERT_EQ(back.size(), traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    ASSERT_TRUE(back.records[i].covariance.has_value());
    const Matrix6d& cov = *back.records[i].covariance;
    EXPECT_EQ(cov(0, 0), vt_list[i]);
    EXPECT_EQ(cov(3, 3), vr_list[i]);
    EXPECT_EQ((cov - *traj.records[i].covariance).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE(pose_gap(back.records[i].pose, traj.records[i].pose), 1e-15);
  }
}

TEST(ParseMatrix4, ReadsIdentityAndPureTranslation) {
  {
    std::istringstream in("1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n");
    const GroupPose pose = parse_matrix4(in);
    EXPECT_LE(pose_gap(pose, GroupPose()), 0.0);
  }
  {
    std::istringstream in("1 0 0 -4\n0 1 0 2.5\n0 0 1 7\n0 0 0 1\n");
    const GroupPose pose = parse_matrix4(in);
    EXPECT_DOUBLE_EQ(pose.translation.x(), -4.0);
    EXPECT_DOUBLE_EQ(pose.translation.y(), 2.5);
    EXPECT_DOUBLE_EQ(pose.translation.z(), 7.0);
  }
}

TEST(ParseMatrix4, RejectsNonRigidBlocks) {
  {
    // Uniformly scaled rotation: orthogonality deviation 1.25 >= 1e-3.
    std::istringstream in("1.5 0 0 0\n0 1.5 0 0\n0 0 1.5 0\n0 0 0 1\n");
    EXPECT_THROW(parse_matrix4(in), ParseError);
  }
  {
    std::istringstream in("1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0.5 1\n");
    EXPECT_THROW(parse_matrix4(in), ParseError);  // bad bottom row
  }
  {
    std::istringstream in("1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0\n");
    EXPECT_THROW(parse_matrix4(in), ParseError);  // 15 numbers
  }
  {
    // Reflection: orthonormal but determinant -1.
    std::istringstream in("-1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n");
    EXPECT_THROW(parse_matrix4(in), ParseError);
  }
}

TEST(ParseMatrix4, ProjectsMildlyDriftedBlocks) {
  std::istringstream in(
      "1 1e-5 0 0\n"
      "0 1 0 0\n"
      "0 0 1 0\n"
      "0 0 0 1\n");
  const GroupPose pose = parse_matrix4(in);
  const Matrix3d r = pose.rotation_matrix();
  EXPECT_LE((r.transpose() * r - Matrix3d::Identity()).cwiseAbs().maxCoeff(),
            1e-12);
  EXPECT_LE(pose_gap(pose, GroupPose()), 1e-4);
}

TEST(ParseMatrix4, FixtureParsesToTheExpectedPose) {
  const std::filesystem::path path =
      std::filesystem::path(POSEFUSE_FIXTURE_DIR) / "pose_matrix.txt";
  std::ifstream in(path);
  ASSERT_TRUE(in.is_open()) << path;
  const GroupPose pose = parse_matrix4(in, path.string());

  EXPECT_DOUBLE_EQ(pose.translation.x(), 1.0);
  EXPECT_DOUBLE_EQ(pose.translation.y(), 2.0);
  EXPECT_DOUBLE_EQ(pose.translation.z(), 3.0);
  const double half = std::sqrt(0.5);
  const Eigen::Quaterniond q = pose.canonical_rotation();
  EXPECT_NEAR(q.w(), half, 1e-15);
  EXPECT_NEAR(q.x(), 0.0, 1e-15);
  EXPECT_NEAR(q.y(), 0.0, 1e-15);
  EXPECT_NEAR(q.z(), half, 1e-15);
}

TEST(TrajectoryFromMatrix4Files, AssignsFrameRateTimestamps) {
  const std::filesystem::path dir = make_temp_dir("mat4");
  std::vector<std::string> paths;
  for (int i = 0; i < 3; ++i) {
    const std::filesystem::path p = dir / ("frame" + std::to_string(i) + ".txt");
    const double x = 0.5 * i;
    write_file(p, "1 0 0 " + std::to_string(x) +
                      "\n0 1 0 0\n0 0 1 0\n0 0 0 1\n");
    paths.push_back(p.string());
  }
  const Trajectory traj = trajectory_from_matrix4_files(paths, 10.0);
  ASSERT_EQ(traj.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(traj.records[i].timestamp, i / 10.0);
    EXPECT_NEAR(traj.records[i].pose.translation.x(), 0.5 * i, 1e-15);
  }
  EXPECT_THROW(trajectory_from_matrix4_files({(dir / "missing.txt").string()}),
               IoError);
  EXPECT_THROW(trajectory_from_matrix4_files(paths, 0.0), ConfigError);
}

TEST(LoadTrajectory, AutoDetectsTheColumnCount) {
  const std::filesystem::path dir = make_temp_dir("autodetect");

  const std::filesystem::path plain = dir / "plain.tum";
  write_file(plain, "# c\n0.0 1 2 3 0 0 0 1\n");
  const Trajectory a = load_trajectory(plain.string());
  ASSERT_EQ(a.size(), 1u);
  EXPECT_FALSE(a.records[0].covariance.has_value());

  const std::filesystem::path cov = dir / "cov.tumcov";
  write_file(cov, "0.0 1 2 3 0 0 0 1 0.04 0.0025\n");
  const Trajectory b = load_trajectory(cov.string());
  ASSERT_EQ(b.size(), 1u);
  EXPECT_TRUE(b.records[0].covariance.has_value());

  const std::filesystem::path odd = dir / "odd.txt";
  write_file(odd, "0.0 1 2 3 0 0 0 1 0.04\n");
  EXPECT_THROW(load_trajectory(odd.string()), ParseError);

  const std::filesystem::path empty = dir / "empty.txt";
  write_file(empty, "# only comments\n\n");
  EXPECT_TRUE(load_trajectory(empty.string()).empty());

  EXPECT_THROW(load_trajectory((dir / "missing.txt").string()), IoError);
}

TEST(FormatDouble, ShortestFormRoundtrips) {
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(-0.5), "-0.5");
  EXPECT_EQ(format_double(0.1), "0.1");
  Rng rng(63);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-9, 9));
    const std::string s = format_double(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
}

}  // namespace
}  // namespace posefuse
