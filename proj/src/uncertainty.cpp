#include "posefuse/uncertainty.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "posefuse/errors.hpp"

namespace posefuse {

BlockDiagonalCovariance::BlockDiagonalCovariance(double trans_sq,
                                                 double rot_sq) {
  if (!(trans_sq >= 0.0) || !(rot_sq >= 0.0)) {
    throw NumericalError("BlockDiagonalCovariance: negative variance");
  }
  sigma_trans_sq = std::max(trans_sq, kVarianceFloor);
  sigma_rot_sq = std::max(rot_sq, kVarianceFloor);
}

Matrix6d BlockDiagonalCovariance::to_dense() const {
  Matrix6d m = Matrix6d::Zero();
  m.topLeftCorner<3, 3>() = sigma_trans_sq * Matrix3d::Identity();
  m.bottomRightCorner<3, 3>() = sigma_rot_sq * Matrix3d::Identity();
  return m;
}

PoseGaussian::PoseGaussian(const GroupPose& mean_in,
                           const Matrix6d& covariance_in, Role role_in)
    : mean(mean_in), role(role_in) {
  if (!covariance_in.allFinite()) {
    throw NumericalError("PoseGaussian: non-finite covariance");
  }
  const double asym = (covariance_in - covariance_in.transpose())
                          .cwiseAbs()
                          .maxCoeff();
  if (asym > 1e-9) {
    throw NumericalError("PoseGaussian: covariance asymmetric by " +
                         std::to_string(asym));
  }
  covariance = 0.5 * (covariance_in + covariance_in.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix6d> eig(covariance);
  const double min_eig = eig.eigenvalues().minCoeff();
  const double max_eig = eig.eigenvalues().maxCoeff();
  if (min_eig < -1e-9 * std::max(1.0, max_eig)) {
    throw NumericalError("PoseGaussian: covariance not positive semidefinite, "
                         "min eigenvalue " +
                         std::to_string(min_eig));
  }
  if (min_eig < kVarianceFloor) {
    covariance += (kVarianceFloor - min_eig) * Matrix6d::Identity();
  }
}

PoseGaussian::PoseGaussian(const GroupPose& mean_in,
                           const BlockDiagonalCovariance& cov_in, Role role_in)
    : PoseGaussian(mean_in, cov_in.to_dense(), role_in) {}

LogCovarianceParams LogCovarianceParams::from_variances(double sigma_trans_sq,
                                                        double sigma_rot_sq) {
  if (!(sigma_trans_sq > 0.0) || !(sigma_rot_sq > 0.0)) {
    throw NumericalError("LogCovarianceParams: variances must be positive");
  }
  return {std::log(sigma_trans_sq), std::log(sigma_rot_sq)};
}

double LogCovarianceParams::sigma_trans_sq() const {
  return std::exp(log_sigma_trans_sq);
}

double LogCovarianceParams::sigma_rot_sq() const {
  return std::exp(log_sigma_rot_sq);
}

BlockDiagonalCovariance LogCovarianceParams::to_block_covariance() const {
  return {sigma_trans_sq(), sigma_rot_sq()};
}

NllResult nll_loss(const TangentPose& prediction, const TangentPose& truth,
                   const LogCovarianceParams& params) {
  if (!prediction.all_finite() || !truth.all_finite() ||
      !std::isfinite(params.log_sigma_trans_sq) ||
      !std::isfinite(params.log_sigma_rot_sq)) {
    throw NumericalError("nll_loss: non-finite input");
  }
  const Vector6d r = prediction.vec() - truth.vec();
  const double inv_var_trans = std::exp(-params.log_sigma_trans_sq);
  const double inv_var_rot = std::exp(-params.log_sigma_rot_sq);

  const double q_trans = r.head<3>().squaredNorm();
  const double q_rot = r.tail<3>().squaredNorm();

  NllResult out;
  out.loss = 0.5 * q_trans * inv_var_trans + 1.5 * params.log_sigma_trans_sq +
             0.5 * q_rot * inv_var_rot + 1.5 * params.log_sigma_rot_sq;
  out.d_prediction.head<3>() = inv_var_trans * r.head<3>();
  out.d_prediction.tail<3>() = inv_var_rot * r.tail<3>();
  out.d_log_sigma_trans_sq = 1.5 - 0.5 * q_trans * inv_var_trans;
  out.d_log_sigma_rot_sq = 1.5 - 0.5 * q_rot * inv_var_rot;
  return out;
}

LogCovarianceParams fit_covariance(const std::vector<TangentPose>& residuals,
                                   double learning_rate, int iterations) {
  if (residuals.empty()) {
    throw ConfigError("fit_covariance: empty residual list");
  }
  if (!(learning_rate > 0.0)) {
    throw ConfigError("fit_covariance: learning_rate must be positive");
  }
  const double log_floor = std::log(kVarianceFloor);
  const TangentPose zero;
  LogCovarianceParams params;  // start at unit variances
  const double inv_n = 1.0 / static_cast<double>(residuals.size());
  for (int it = 0; it < iterations; ++it) {
    double g_trans = 0.0;
    double g_rot = 0.0;
    for (const TangentPose& r : residuals) {
      const NllResult res = nll_loss(r, zero, params);
      g_trans += res.d_log_sigma_trans_sq;
      g_rot += res.d_log_sigma_rot_sq;
    }
    params.log_sigma_trans_sq -= learning_rate * g_trans * inv_n;
    params.log_sigma_rot_sq -= learning_rate * g_rot * inv_n;
    params.log_sigma_trans_sq =
        std::max(params.log_sigma_trans_sq, log_floor);
    params.log_sigma_rot_sq = std::max(params.log_sigma_rot_sq, log_floor);
  }
  return params;
}

TangentPose relative_from_absolute(const GroupPose& z_prev,
                                   const GroupPose& z_curr) {
  return ominus(z_curr, z_prev);
}

}  // namespace posefuse
