#pragma once

#include <vector>

#include "posefuse/lie.hpp"

namespace posefuse {

// Smallest variance any covariance constructor or fit will emit. Keeps every
// 6x6 covariance strictly positive definite without relying on callers.
inline constexpr double kVarianceFloor = 1e-12;

// Isotropic-per-block covariance: one variance shared by the three
// translation axes, one by the three rotation axes.
struct BlockDiagonalCovariance {
  double sigma_trans_sq = 1.0;  // m^2
  double sigma_rot_sq = 1.0;    // rad^2

  BlockDiagonalCovariance() = default;
  // Clamps non-negative inputs up to the variance floor; negative input is
  // rejected.
  BlockDiagonalCovariance(double trans_sq, double rot_sq);

  Matrix6d to_dense() const;
};

enum class Role { kMeasurement, kControl, kState };

// Gaussian over SE(3): mean on the group, covariance in the tangent space of
// the mean under the right-perturbation chart. Construction symmetrizes the
// covariance and lifts eigenvalues to the variance floor; matrices that are
// grossly asymmetric or indefinite are rejected rather than repaired.
struct PoseGaussian {
  GroupPose mean;
  Matrix6d covariance = Matrix6d::Identity();
  Role role = Role::kState;

  PoseGaussian() = default;
  PoseGaussian(const GroupPose& mean_in, const Matrix6d& covariance_in,
               Role role_in);
  PoseGaussian(const GroupPose& mean_in, const BlockDiagonalCovariance& cov_in,
               Role role_in);
};

// Variances stored as logarithms, so positivity is structural and the NLL
// objective below is smooth everywhere.
struct LogCovarianceParams {
  double log_sigma_trans_sq = 0.0;
  double log_sigma_rot_sq = 0.0;

  static LogCovarianceParams from_variances(double sigma_trans_sq,
                                            double sigma_rot_sq);
  double sigma_trans_sq() const;
  double sigma_rot_sq() const;
  BlockDiagonalCovariance to_block_covariance() const;
};

struct NllResult {
  double loss = 0.0;
  Vector6d d_prediction = Vector6d::Zero();
  double d_log_sigma_trans_sq = 0.0;
  double d_log_sigma_rot_sq = 0.0;
};

// Heteroscedastic Gaussian negative log likelihood of a 6-component residual
// r = prediction - truth (componentwise in the tangent chart):
//   loss = sum_i [ r_i^2 / (2 sigma_i^2) + log(sigma_i^2) / 2 ]
// with the translation variance on components 0-2 and the rotation variance
// on 3-5. Returns analytic gradients for the prediction and both
// log-variances.
NllResult nll_loss(const TangentPose& prediction, const TangentPose& truth,
                   const LogCovarianceParams& params);

// Maximum-likelihood variance fit: gradient descent on the mean nll_loss of
// the residuals (truth fixed at zero), in log-variance space. The objective
// is convex in the log-variances; the descent converges to the per-block
// mean-squared-residual MLE.
LogCovarianceParams fit_covariance(const std::vector<TangentPose>& residuals,
                                   double learning_rate, int iterations);

// Control that carries z_prev to z_curr: oplus(z_prev, u) == z_curr.
TangentPose relative_from_absolute(const GroupPose& z_prev,
                                   const GroupPose& z_curr);

}  // namespace posefuse
