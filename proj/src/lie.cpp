#include "posefuse/lie.hpp"

#include <cmath>
#include <stdexcept>

#include "posefuse/errors.hpp"

namespace posefuse {

namespace detail {

ExpCoeffs exp_coeffs_closed(double theta) {
  const double t2 = theta * theta;
  // a = (1-cos θ)/θ² written as 2 sin²(θ/2)/θ², which does not cancel for
  // small θ; the branches then agree at the switch to full precision.
  const double half_sinc = std::sin(0.5 * theta) / theta;
  return {
      half_sinc,
      2.0 * half_sinc * half_sinc,
      (theta - std::sin(theta)) / (t2 * theta),
  };
}

ExpCoeffs exp_coeffs_series(double theta) {
  const double t2 = theta * theta;
  const double t4 = t2 * t2;
  return {
      0.5 - t2 / 48.0 + t4 / 3840.0,
      0.5 - t2 / 24.0 + t4 / 720.0,
      1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0,
  };
}

double vinv_coeff_closed(double theta) {
  // 1/θ² - cot(θ/2)/(2θ); the half-angle form stays finite up to θ = π.
  const double half = 0.5 * theta;
  return 1.0 / (theta * theta) -
         std::cos(half) / (2.0 * theta * std::sin(half));
}

double vinv_coeff_series(double theta) {
  const double t2 = theta * theta;
  return 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
}

}  // namespace detail

Matrix3d skew(const Vector3d& v) {
  Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Quaterniond GroupPose::canonical_rotation() const {
  Eigen::Quaterniond q = rotation;
  double lead = q.w();
  if (lead == 0.0) lead = q.x();
  if (lead == 0.0) lead = q.y();
  if (lead == 0.0) lead = q.z();
  if (lead < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

bool GroupPose::is_approx(const GroupPose& other, double tol) const {
  const Eigen::Quaterniond qa = canonical_rotation();
  const Eigen::Quaterniond qb = other.canonical_rotation();
  return (qa.coeffs() - qb.coeffs()).norm() <= tol &&
         (translation - other.translation).norm() <= tol;
}

GroupPose exp(const TangentPose& xi) {
  if (!xi.all_finite()) {
    throw NumericalError("exp: non-finite tangent input");
  }
  const double theta = xi.phi.norm();
  const detail::ExpCoeffs co = theta < kSmallAngle
                                   ? detail::exp_coeffs_series(theta)
                                   : detail::exp_coeffs_closed(theta);

  Eigen::Quaterniond q;
  q.w() = std::cos(0.5 * theta);
  q.vec() = co.k * xi.phi;
  q.normalize();

  const Matrix3d Phi = skew(xi.phi);
  const Matrix3d V = Matrix3d::Identity() + co.a * Phi + co.b * Phi * Phi;

  GroupPose g;
  g.rotation = q;
  g.translation = V * xi.rho;
  return g;
}

TangentPose log(const GroupPose& g) {
  Eigen::Quaterniond q = g.canonical_rotation();
  q.normalize();

  const double s = q.vec().norm();
  const double theta = 2.0 * std::atan2(s, q.w());

  TangentPose xi;
  if (s < 0.5 * kSmallAngle) {
    // θ/s -> 2/w as s -> 0; expand in r = s/w.
    const double r = s / q.w();
    const double r2 = r * r;
    const double scale = (2.0 / q.w()) * (1.0 - r2 / 3.0 + r2 * r2 / 5.0);
    xi.phi = scale * q.vec();
  } else {
    xi.phi = (theta / s) * q.vec();
  }

  const double c = theta < kSmallAngle ? detail::vinv_coeff_series(theta)
                                       : detail::vinv_coeff_closed(theta);
  const Matrix3d Phi = skew(xi.phi);
  const Matrix3d Vinv = Matrix3d::Identity() - 0.5 * Phi + c * Phi * Phi;
  xi.rho = Vinv * g.translation;

  xi.near_pi = std::abs(theta - M_PI) < 1e-6;
  return xi;
}

GroupPose compose(const GroupPose& a, const GroupPose& b) {
  GroupPose g;
  g.rotation = (a.rotation * b.rotation).normalized();
  g.translation = a.rotation * b.translation + a.translation;
  return g;
}

GroupPose inverse(const GroupPose& g) {
  GroupPose inv;
  inv.rotation = g.rotation.conjugate();
  inv.translation = -(inv.rotation * g.translation);
  return inv;
}

GroupPose oplus(const GroupPose& x, const TangentPose& xi) {
  return compose(x, exp(xi));
}

TangentPose ominus(const GroupPose& a, const GroupPose& b) {
  return log(compose(inverse(b), a));
}

Matrix6d adjoint(const GroupPose& g) {
  const Matrix3d R = g.rotation_matrix();
  Matrix6d ad = Matrix6d::Zero();
  ad.topLeftCorner<3, 3>() = R;
  ad.topRightCorner<3, 3>() = skew(g.translation) * R;
  ad.bottomRightCorner<3, 3>() = R;
  return ad;
}

Matrix6d numeric_jacobian(const TangentMap& f, const TangentPose& at,
                          double step) {
  if (!(step >= 1e-8 && step <= 1e-3)) {
    throw ConfigError("numeric_jacobian: step must lie in [1e-8, 1e-3]");
  }
  Matrix6d jac;
  const Vector6d base = at.vec();
  for (int i = 0; i < 6; ++i) {
    Vector6d hi = base;
    Vector6d lo = base;
    hi[i] += step;
    lo[i] -= step;
    jac.col(i) =
        (f(TangentPose(hi)).vec() - f(TangentPose(lo)).vec()) / (2.0 * step);
  }
  return jac;
}

}  // namespace posefuse
