#pragma once

#include <optional>

#include "posefuse/lie.hpp"
#include "posefuse/uncertainty.hpp"

namespace posefuse {

// Manifold EKF state. Single-owner, sequential: do not run predict/correct
// concurrently on one instance.
struct EkfState {
  PoseGaussian estimate;   // role kState once initialized
  int step_index = 0;      // number of updates applied (predicts + corrects)
  bool initialized = false;
};

// Everything one filter update computed, for inspection and testing.
struct KalmanStepReport {
  PoseGaussian prior;                 // state before the correction
  Matrix6d transition_jacobian = Matrix6d::Identity();
  Matrix6d measurement_jacobian = Matrix6d::Identity();
  Matrix6d gain = Matrix6d::Zero();
  TangentPose residual;
  PoseGaussian posterior;
  bool measurement_applied = false;
};

// Closed-form Jacobian of the prediction mean map in the right-perturbation
// chart: Ad(control_mean)^{-1}. Exposed so verification suites can compare it
// against a finite-difference oracle; predict() uses exactly this function.
Matrix6d transition_jacobian(const GroupPose& control_mean);

// Seeds the filter from the first absolute measurement. Re-initialization of
// an already-initialized state is an error.
void initialize(EkfState& state, const PoseGaussian& first_measurement);

// Propagates the state through a relative-motion control: mean by group
// composition, covariance by F Sigma F^T + Sigma_u with the exact transition
// Jacobian F = Ad(control.mean)^{-1} of the right-perturbation chart.
KalmanStepReport predict(EkfState& state, const PoseGaussian& control);

// Folds in an absolute measurement. The measurement function is the identity
// on the group, so H = I and the residual is measurement ominus prior. The
// covariance update uses the Joseph form, which is algebraically equal to
// (I - KH) Sigma at the optimal gain but stays positive semidefinite under
// roundoff.
KalmanStepReport correct(EkfState& state, const PoseGaussian& measurement);

// predict, then correct when a measurement is present. Without a measurement
// this is a dead-reckoning step and the report says so.
KalmanStepReport step(EkfState& state, const PoseGaussian& control,
                      const std::optional<PoseGaussian>& measurement);

struct GridPosterior {
  double mean = 0.0;
  double variance = 0.0;
};

// Brute-force 1-D Bayes fusion: multiplies the prior and measurement
// densities on a uniform grid centered between the means and integrates.
// Independent of the filter algebra; used to cross-check correct().
// grid_points must be >= 1001 and both sigmas must span >= 3 grid cells.
GridPosterior bayes_grid_oracle(double prior_mean, double prior_var,
                                double meas_mean, double meas_var,
                                double grid_halfwidth, int grid_points);

}  // namespace posefuse
