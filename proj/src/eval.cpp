#include "posefuse/eval.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "posefuse/errors.hpp"

namespace posefuse {

namespace {

constexpr double kTimestampTol = 1e-6;  // s

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

void check_alignment(const Trajectory& estimate, const Trajectory& truth) {
  if (estimate.size() != truth.size()) {
    throw ConfigError("pose_errors: length mismatch (" +
                      std::to_string(estimate.size()) + " vs " +
                      std::to_string(truth.size()) + ")");
  }
  if (estimate.empty()) {
    throw ConfigError("pose_errors: empty trajectories");
  }
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double dt =
        std::abs(estimate.records[i].timestamp - truth.records[i].timestamp);
    if (dt > kTimestampTol) {
      throw ConfigError(
          "pose_errors: timestamp mismatch at t=" +
          std::to_string(truth.records[i].timestamp) + " (delta " +
          std::to_string(dt) + " s)");
    }
  }
}

double geodesic_deg(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  const double dot = std::min(1.0, std::abs(a.dot(b)));
  return 2.0 * std::acos(dot) * 180.0 / M_PI;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) {
    throw ConfigError("median: empty list");
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) {
    throw ConfigError("mean: empty list");
  }
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

std::string ErrorReport::summary() const {
  return fmt("%.2fm", median_trans) + ", " + fmt("%.2f\xC2\xB0", median_rot_deg);
}

ErrorReport pose_errors(const Trajectory& estimate, const Trajectory& truth) {
  check_alignment(estimate, truth);
  ErrorReport report;
  report.trans_errors.reserve(estimate.size());
  report.rot_errors_deg.reserve(estimate.size());
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const GroupPose& e = estimate.records[i].pose;
    const GroupPose& g = truth.records[i].pose;
    report.trans_errors.push_back((e.translation - g.translation).norm());
    report.rot_errors_deg.push_back(geodesic_deg(e.rotation, g.rotation));
  }
  report.median_trans = median(report.trans_errors);
  report.mean_trans = mean(report.trans_errors);
  report.median_rot_deg = median(report.rot_errors_deg);
  report.mean_rot_deg = mean(report.rot_errors_deg);
  return report;
}

NeesReport nees(const std::vector<PoseGaussian>& estimates,
                const Trajectory& truth) {
  if (estimates.size() != truth.size() || estimates.empty()) {
    throw ConfigError("nees: estimate/truth length mismatch or empty");
  }
  NeesReport report;
  report.per_frame.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const TangentPose e = ominus(truth.records[i].pose, estimates[i].mean);
    Eigen::LLT<Matrix6d> llt(estimates[i].covariance);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("nees: covariance at frame " + std::to_string(i) +
                           " is not positive definite");
    }
    const Vector6d ev = e.vec();
    report.per_frame.push_back(ev.dot(llt.solve(ev)));
  }
  report.mean = mean(report.per_frame);
  return report;
}

ComparisonTable compare_methods(
    const std::vector<std::pair<std::string, ErrorReport>>& reports) {
  if (reports.empty()) {
    throw ConfigError("compare_methods: need at least one report");
  }
  constexpr int kColumns = 4;
  auto column = [](const ErrorReport& r, int c) {
    switch (c) {
      case 0: return r.median_trans;
      case 1: return r.mean_trans;
      case 2: return r.median_rot_deg;
      default: return r.mean_rot_deg;
    }
  };

  double best[kColumns];
  for (int c = 0; c < kColumns; ++c) {
    best[c] = column(reports[0].second, c);
    for (const auto& [name, rep] : reports) {
      best[c] = std::min(best[c], column(rep, c));
    }
  }

  std::size_t name_width = std::string("method").size();
  for (const auto& [name, rep] : reports) {
    name_width = std::max(name_width, name.size());
  }

  static const char* kHeaders[kColumns] = {"median_trans_m", "mean_trans_m",
                                           "median_rot_deg", "mean_rot_deg"};
  std::ostringstream text;
  std::ostringstream machine;
  text << "method" << std::string(name_width - 6, ' ');
  for (int c = 0; c < kColumns; ++c) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "  %15s", kHeaders[c]);
    text << buf;
  }
  text << '\n';
  machine << "# columns: method median_trans_m mean_trans_m median_rot_deg "
             "mean_rot_deg best_mask\n";

  for (const auto& [name, rep] : reports) {
    text << name << std::string(name_width - name.size(), ' ');
    std::string mask;
    for (int c = 0; c < kColumns; ++c) {
      const double v = column(rep, c);
      const bool is_best = v <= best[c];
      mask.push_back(is_best ? '1' : '0');
      char buf[32];
      std::snprintf(buf, sizeof(buf), "  %14.6f%c", v, is_best ? '*' : ' ');
      text << buf;
    }
    text << '\n';
    machine << "row " << name;
    for (int c = 0; c < kColumns; ++c) {
      machine << ' ' << fmt("%.6f", column(rep, c));
    }
    machine << ' ' << mask << '\n';
  }
  return {text.str(), machine.str()};
}

std::string render_eval_dump(const Trajectory& estimate,
                             const ErrorReport& report) {
  if (estimate.size() != report.trans_errors.size()) {
    throw ConfigError("render_eval_dump: report does not match trajectory");
  }
  std::ostringstream out;
  out << "# columns: frame t x y z err_trans_m err_rot_deg\n";
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const TrajectoryRecord& rec = estimate.records[i];
    out << "frame " << i << ' ' << fmt("%.9f", rec.timestamp) << ' '
        << fmt("%.9f", rec.pose.translation.x()) << ' '
        << fmt("%.9f", rec.pose.translation.y()) << ' '
        << fmt("%.9f", rec.pose.translation.z()) << ' '
        << fmt("%.9f", report.trans_errors[i]) << ' '
        << fmt("%.9f", report.rot_errors_deg[i]) << '\n';
  }
  out << "summary median_trans_m " << fmt("%.9f", report.median_trans) << '\n';
  out << "summary mean_trans_m " << fmt("%.9f", report.mean_trans) << '\n';
  out << "summary median_rot_deg " << fmt("%.9f", report.median_rot_deg)
      << '\n';
  out << "summary mean_rot_deg " << fmt("%.9f", report.mean_rot_deg) << '\n';
  if (report.nees_mean.has_value()) {
    out << "summary nees_mean " << fmt("%.9f", *report.nees_mean) << '\n';
  }
  out << "summary headline " << report.summary() << '\n';
  out << "meta rotation_metric geodesic\n";
  return out.str();
}

}  // namespace posefuse
