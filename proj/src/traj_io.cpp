#include "posefuse/traj_io.hpp"

#include <Eigen/SVD>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <system_error>

#include "posefuse/errors.hpp"
#include "posefuse/uncertainty.hpp"

namespace posefuse {

namespace {

bool is_comment_or_blank(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

std::vector<std::string> split_fields(const std::string& line) {
  std::istringstream iss(line);
  std::vector<std::string> fields;
  std::string tok;
  while (iss >> tok) fields.push_back(tok);
  return fields;
}

double parse_field(const std::string& tok, int line_no) {
  double value = 0.0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("not a number: '" + tok + "'", line_no);
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite value: '" + tok + "'", line_no);
  }
  return value;
}

TrajectoryRecord record_from_fields(const std::vector<double>& v,
                                    int line_no) {
  TrajectoryRecord rec;
  rec.timestamp = v[0];
  rec.pose.translation = Vector3d(v[1], v[2], v[3]);
  Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);  // disk order qx qy qz qw
  const double norm = q.norm();
  if (norm < 1e-3) {
    throw ParseError("degenerate quaternion with norm " + std::to_string(norm),
                     line_no);
  }
  // Keep the exact coefficients when they are unit to writer precision, so
  // write -> parse -> write is byte-stable; renormalize anything sloppier.
  rec.pose.rotation = std::abs(norm - 1.0) > 1e-12 ? q.normalized() : q;
  return rec;
}

Trajectory parse_pose_lines(std::istream& in, std::size_t field_count,
                            bool with_covariance) {
  Trajectory traj;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const std::vector<std::string> toks = split_fields(line);
    if (toks.size() != field_count) {
      throw ParseError("expected " + std::to_string(field_count) +
                           " fields, got " + std::to_string(toks.size()),
                       line_no);
    }
    std::vector<double> values(toks.size());
    for (std::size_t i = 0; i < toks.size(); ++i) {
      values[i] = parse_field(toks[i], line_no);
    }
    TrajectoryRecord rec = record_from_fields(values, line_no);
    if (with_covariance) {
      const double var_trans = values[8];
      const double var_rot = values[9];
      if (!(var_trans > 0.0) || !(var_rot > 0.0)) {
        throw ParseError("non-positive variance", line_no);
      }
      rec.covariance = BlockDiagonalCovariance(var_trans, var_rot).to_dense();
    }
    if (!traj.records.empty() &&
        !(rec.timestamp > traj.records.back().timestamp)) {
      throw ParseError("timestamp not strictly increasing", line_no);
    }
    traj.records.push_back(std::move(rec));
  }
  return traj;
}

}  // namespace

Trajectory parse_tum(std::istream& in) { return parse_pose_lines(in, 8, false); }

Trajectory parse_tum_cov(std::istream& in) {
  return parse_pose_lines(in, 10, true);
}

GroupPose parse_matrix4(std::istream& in, const std::string& name) {
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    for (const std::string& tok : split_fields(line)) {
      values.push_back(parse_field(tok, line_no));
    }
  }
  const std::string label = name.empty() ? "matrix" : name;
  if (values.size() != 16) {
    throw ParseError(label + ": expected 16 numbers, got " +
                         std::to_string(values.size()),
                     line_no);
  }
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      m(r, c) = values[4 * r + c];
    }
  }
  const Eigen::Vector4d bottom = m.row(3).transpose();
  if ((bottom - Eigen::Vector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-6) {
    throw ParseError(label + ": bottom row is not (0,0,0,1)", line_no);
  }
  const Matrix3d r_block = m.topLeftCorner<3, 3>();
  const double drift =
      (r_block.transpose() * r_block - Matrix3d::Identity()).cwiseAbs()
          .maxCoeff();
  if (drift >= 1e-3 || r_block.determinant() < 0.0) {
    throw ParseError(label + ": 3x3 block is not a rotation (deviation " +
                         std::to_string(drift) + ")",
                     line_no);
  }
  Matrix3d rotation = r_block;
  if (drift > 1e-12) {
    Eigen::JacobiSVD<Matrix3d> svd(
        r_block, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix3d flip = Matrix3d::Identity();
    flip(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant();
    rotation = svd.matrixU() * flip * svd.matrixV().transpose();
    if (drift > 1e-9) {
      std::clog << "note: " << label
                << ": projected near-rotation block, deviation " << drift
                << "\n";
    }
  }
  GroupPose pose;
  pose.rotation = Eigen::Quaterniond(rotation).normalized();
  pose.translation = m.topRightCorner<3, 1>();
  return pose;
}

Trajectory trajectory_from_matrix4_files(const std::vector<std::string>& paths,
                                         double rate_hz) {
  if (!(rate_hz > 0.0)) {
    throw ConfigError("trajectory_from_matrix4_files: rate_hz must be > 0");
  }
  Trajectory traj;
  traj.records.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::ifstream in(paths[i]);
    if (!in) {
      throw IoError("cannot open " + paths[i]);
    }
    TrajectoryRecord rec;
    rec.timestamp = static_cast<double>(i) / rate_hz;
    rec.pose = parse_matrix4(in, paths[i]);
    traj.records.push_back(std::move(rec));
  }
  return traj;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    throw NumericalError("format_double: conversion failed");
  }
  return std::string(buf, ptr);
}

namespace {

std::string format_timestamp(double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", t);
  return buf;
}

void write_pose_fields(const TrajectoryRecord& rec, std::ostream& out) {
  const Eigen::Quaterniond q = rec.pose.canonical_rotation();
  out << format_timestamp(rec.timestamp) << ' '
      << format_double(rec.pose.translation.x()) << ' '
      << format_double(rec.pose.translation.y()) << ' '
      << format_double(rec.pose.translation.z()) << ' '
      << format_double(q.x()) << ' ' << format_double(q.y()) << ' '
      << format_double(q.z()) << ' ' << format_double(q.w());
}

}  // namespace

void write_tum(const Trajectory& traj, std::ostream& out) {
  for (const TrajectoryRecord& rec : traj.records) {
    write_pose_fields(rec, out);
    out << '\n';
  }
}

void write_tum_cov(const Trajectory& traj, std::ostream& out) {
  for (const TrajectoryRecord& rec : traj.records) {
    if (!rec.covariance.has_value()) {
      throw IoError("write_tum_cov: record at t=" +
                    std::to_string(rec.timestamp) + " has no covariance");
    }
    const Matrix6d& cov = *rec.covariance;
    const double var_trans = cov.topLeftCorner<3, 3>().trace() / 3.0;
    const double var_rot = cov.bottomRightCorner<3, 3>().trace() / 3.0;
    write_pose_fields(rec, out);
    out << ' ' << format_double(var_trans) << ' ' << format_double(var_rot)
        << '\n';
  }
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  return in;
}

}  // namespace

Trajectory load_tum(const std::string& path) {
  std::ifstream in = open_input(path);
  return parse_tum(in);
}

Trajectory load_tum_cov(const std::string& path) {
  std::ifstream in = open_input(path);
  return parse_tum_cov(in);
}

Trajectory load_trajectory(const std::string& path) {
  {
    std::ifstream probe = open_input(path);
    std::string line;
    while (std::getline(probe, line)) {
      if (is_comment_or_blank(line)) continue;
      const std::size_t n = split_fields(line).size();
      if (n == 8) return load_tum(path);
      if (n == 10) return load_tum_cov(path);
      throw ParseError(path + ": unrecognized column count " +
                           std::to_string(n),
                       1);
    }
  }
  return Trajectory{};  // empty file: empty trajectory
}

void save_tum(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  write_tum(traj, out);
  if (!out) {
    throw IoError("write failed for " + path);
  }
}

void save_tum_cov(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  write_tum_cov(traj, out);
  if (!out) {
    throw IoError("write failed for " + path);
  }
}

}  // namespace posefuse
