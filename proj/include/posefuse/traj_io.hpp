#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "posefuse/lie.hpp"

namespace posefuse {

struct TrajectoryRecord {
  double timestamp = 0.0;  // seconds
  GroupPose pose;
  std::optional<Matrix6d> covariance;  // tangent-space, right-perturbation
};

// Timestamps strictly increasing; quaternions unit-norm after load.
struct Trajectory {
  std::vector<TrajectoryRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

// Plain pose stream: "timestamp tx ty tz qx qy qz qw" per line, '#' comments
// and blank lines allowed. Rejects wrong field counts, non-finite values, and
// non-monotone timestamps, reporting the offending line.
Trajectory parse_tum(std::istream& in);

// Pose stream with two trailing per-block variances:
// "... sigma_trans_sq sigma_rot_sq". Variances must be positive.
Trajectory parse_tum_cov(std::istream& in);

// One 4x4 row-major homogeneous matrix (16 numbers, '#' comments allowed).
// Bottom row must be (0,0,0,1) within 1e-6. A 3x3 block within 1e-3 of
// orthonormal is projected to the nearest rotation (noted on std::clog when
// the drift is visible); anything further off is an error. `name` labels
// error messages.
GroupPose parse_matrix4(std::istream& in, const std::string& name = "");

// Reads one matrix per file; timestamps are frame_index / rate_hz.
Trajectory trajectory_from_matrix4_files(const std::vector<std::string>& paths,
                                         double rate_hz = 30.0);

// Writers emit canonical text: timestamps with 9 fractional digits, all other
// fields in shortest exact form, quaternions sign-canonical (w >= 0).
// parse(write(T)) reproduces translations and unit quaternions bit-for-bit;
// nanosecond-quantized timestamps below ~1e6 s are reproduced exactly.
void write_tum(const Trajectory& traj, std::ostream& out);

// Emits 10 fields; the 6x6 covariance is collapsed to its per-block mean
// diagonal (exact for block-isotropic matrices, lossy otherwise). Every
// record must carry a covariance.
void write_tum_cov(const Trajectory& traj, std::ostream& out);

// Path-level helpers; open failures raise IoError.
Trajectory load_tum(const std::string& path);
Trajectory load_tum_cov(const std::string& path);
// Auto-detects 8 vs 10 columns from the first data line.
Trajectory load_trajectory(const std::string& path);
void save_tum(const Trajectory& traj, const std::string& path);
void save_tum_cov(const Trajectory& traj, const std::string& path);

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace posefuse
