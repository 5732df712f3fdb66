#include "posefuse/ekf.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>
#include <vector>

#include "posefuse/errors.hpp"

namespace posefuse {

namespace {

PoseGaussian make_state(const GroupPose& mean, const Matrix6d& cov) {
  return PoseGaussian(mean, cov, Role::kState);
}

}  // namespace

Matrix6d transition_jacobian(const GroupPose& control_mean) {
  return adjoint(inverse(control_mean));
}

void initialize(EkfState& state, const PoseGaussian& first_measurement) {
  if (state.initialized) {
    throw ConfigError("initialize: filter already initialized");
  }
  if (first_measurement.role != Role::kMeasurement) {
    throw ConfigError("initialize: expected a measurement-role Gaussian");
  }
  state.estimate =
      make_state(first_measurement.mean, first_measurement.covariance);
  state.step_index = 0;
  state.initialized = true;
}

KalmanStepReport predict(EkfState& state, const PoseGaussian& control) {
  if (!state.initialized) {
    throw ConfigError("predict: filter not initialized");
  }
  if (control.role != Role::kControl) {
    throw ConfigError("predict: expected a control-role Gaussian");
  }

  const Matrix6d F = transition_jacobian(control.mean);
  const GroupPose mean = compose(state.estimate.mean, control.mean);
  Matrix6d cov =
      F * state.estimate.covariance * F.transpose() + control.covariance;
  cov = 0.5 * (cov + cov.transpose());

  state.estimate = make_state(mean, cov);
  ++state.step_index;

  KalmanStepReport report;
  report.prior = state.estimate;
  report.transition_jacobian = F;
  report.posterior = state.estimate;
  report.measurement_applied = false;
  return report;
}

KalmanStepReport correct(EkfState& state, const PoseGaussian& measurement) {
  if (!state.initialized) {
    throw ConfigError("correct: filter not initialized");
  }
  if (measurement.role != Role::kMeasurement) {
    throw ConfigError("correct: expected a measurement-role Gaussian");
  }

  KalmanStepReport report;
  report.prior = state.estimate;

  const TangentPose residual = ominus(measurement.mean, state.estimate.mean);

  // Innovation covariance S = Sigma_prior + Sigma_z (H = I). Cholesky with a
  // single diagonal-regularization retry; persistent failure is an error.
  const Matrix6d& prior_cov = state.estimate.covariance;
  Matrix6d s = prior_cov + measurement.covariance;
  Eigen::LLT<Matrix6d> llt(s);
  if (llt.info() != Eigen::Success) {
    s += 1e-12 * Matrix6d::Identity();
    llt.compute(s);
    if (llt.info() != Eigen::Success) {
      throw NumericalError(
          "correct: innovation covariance not factorizable; diagonal range [" +
          std::to_string(s.diagonal().minCoeff()) + ", " +
          std::to_string(s.diagonal().maxCoeff()) + "]");
    }
  }

  // K = Sigma_prior S^{-1}; solve on the symmetric side and transpose.
  const Matrix6d gain = llt.solve(prior_cov).transpose();

  const GroupPose mean =
      oplus(state.estimate.mean, TangentPose(Vector6d(gain * residual.vec())));
  const Matrix6d i_minus_kh = Matrix6d::Identity() - gain;
  Matrix6d cov = i_minus_kh * prior_cov * i_minus_kh.transpose() +
                 gain * measurement.covariance * gain.transpose();
  cov = 0.5 * (cov + cov.transpose());

  state.estimate = make_state(mean, cov);
  ++state.step_index;

  report.gain = gain;
  report.residual = residual;
  report.posterior = state.estimate;
  report.measurement_applied = true;
  return report;
}

KalmanStepReport step(EkfState& state, const PoseGaussian& control,
                      const std::optional<PoseGaussian>& measurement) {
  KalmanStepReport report = predict(state, control);
  if (measurement.has_value()) {
    const Matrix6d transition = report.transition_jacobian;
    report = correct(state, *measurement);
    report.transition_jacobian = transition;
  }
  return report;
}

GridPosterior bayes_grid_oracle(double prior_mean, double prior_var,
                                double meas_mean, double meas_var,
                                double grid_halfwidth, int grid_points) {
  if (!(prior_var > 0.0) || !(meas_var > 0.0)) {
    throw ConfigError("bayes_grid_oracle: variances must be positive");
  }
  if (grid_points < 1001) {
    throw ConfigError("bayes_grid_oracle: need at least 1001 grid points");
  }
  if (!(grid_halfwidth > 0.0)) {
    throw ConfigError("bayes_grid_oracle: grid_halfwidth must be positive");
  }

  const double center = 0.5 * (prior_mean + meas_mean);
  const double spacing = 2.0 * grid_halfwidth / (grid_points - 1);
  const double min_sigma = std::sqrt(std::min(prior_var, meas_var));
  if (min_sigma < 3.0 * spacing) {
    throw ConfigError(
        "bayes_grid_oracle: grid too coarse, sigma " +
        std::to_string(min_sigma) + " < 3 * spacing " +
        std::to_string(spacing));
  }

  double total = 0.0;
  double first_moment = 0.0;
  const double inv_prior = 0.5 / prior_var;
  const double inv_meas = 0.5 / meas_var;
  std::vector<double> weights(grid_points);
  std::vector<double> points(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    const double x = center - grid_halfwidth + i * spacing;
    const double dp = x - prior_mean;
    const double dm = x - meas_mean;
    const double w = std::exp(-dp * dp * inv_prior - dm * dm * inv_meas);
    points[i] = x;
    weights[i] = w;
    total += w;
    first_moment += w * x;
  }
  if (!(total > 0.0)) {
    throw NumericalError("bayes_grid_oracle: zero posterior mass on grid");
  }

  GridPosterior post;
  post.mean = first_moment / total;
  double second_central = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double d = points[i] - post.mean;
    second_central += weights[i] * d * d;
  }
  post.variance = second_central / total;
  return post;
}

}  // namespace posefuse
