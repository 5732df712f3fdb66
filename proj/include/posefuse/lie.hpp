#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <functional>

namespace posefuse {

using Vector3d = Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix3d = Eigen::Matrix3d;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Rotation angle below which exp/log and the left Jacobian switch to their
// 4th-order series branches.
inline constexpr double kSmallAngle = 1e-6;

// se(3) tangent vector, ordered (rho, phi): translation block first.
struct TangentPose {
  Vector3d rho = Vector3d::Zero();  // m
  Vector3d phi = Vector3d::Zero();  // rad, axis-angle

  // Set by log/ominus when the rotation angle lies within 1e-6 of pi, where
  // the canonical representative sits on the chart boundary and downstream
  // precision is degraded. Metadata only; ignored by the algebra.
  bool near_pi = false;

  TangentPose() = default;
  TangentPose(const Vector3d& rho_in, const Vector3d& phi_in)
      : rho(rho_in), phi(phi_in) {}
  explicit TangentPose(const Vector6d& v) : rho(v.head<3>()), phi(v.tail<3>()) {}

  Vector6d vec() const {
    Vector6d v;
    v << rho, phi;
    return v;
  }
  double norm() const { return vec().norm(); }
  bool all_finite() const { return vec().allFinite(); }
};

inline TangentPose operator+(const TangentPose& a, const TangentPose& b) {
  return {a.rho + b.rho, a.phi + b.phi};
}
inline TangentPose operator-(const TangentPose& a, const TangentPose& b) {
  return {a.rho - b.rho, a.phi - b.phi};
}
inline TangentPose operator*(double s, const TangentPose& a) {
  return {s * a.rho, s * a.phi};
}

// SE(3) element: unit quaternion plus translation.
struct GroupPose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();  // (w, x, y, z)
  Vector3d translation = Vector3d::Zero();

  GroupPose() = default;
  GroupPose(const Eigen::Quaterniond& q, const Vector3d& t)
      : rotation(q.normalized()), translation(t) {}

  static GroupPose identity() { return {}; }

  Matrix3d rotation_matrix() const { return rotation.toRotationMatrix(); }

  // Representative with w >= 0 (w == 0 breaks the tie on the first nonzero
  // component), used for serialization and comparison.
  Eigen::Quaterniond canonical_rotation() const;

  bool is_approx(const GroupPose& other, double tol) const;
};

Matrix3d skew(const Vector3d& v);

// Exponential map se(3) -> SE(3): Rodrigues rotation, translation through the
// left Jacobian V(phi). Total on finite input.
GroupPose exp(const TangentPose& xi);

// Logarithm map SE(3) -> se(3), canonical representative with |phi| <= pi.
TangentPose log(const GroupPose& g);

GroupPose compose(const GroupPose& a, const GroupPose& b);
GroupPose inverse(const GroupPose& g);

// Right-perturbation manifold update: x * exp(xi).
GroupPose oplus(const GroupPose& x, const TangentPose& xi);

// Right-perturbation manifold difference: log(b^{-1} * a).
// Satisfies oplus(b, ominus(a, b)) == a.
TangentPose ominus(const GroupPose& a, const GroupPose& b);

// SE(3) adjoint under (rho, phi) ordering: [[R, [t]x R], [0, R]].
Matrix6d adjoint(const GroupPose& g);

using TangentMap = std::function<TangentPose(const TangentPose&)>;

// Central-difference Jacobian of a tangent-to-tangent map.
// step must lie in [1e-8, 1e-3].
Matrix6d numeric_jacobian(const TangentMap& f, const TangentPose& at, double step);

namespace detail {

// Scalar coefficients of exp: k = sin(θ/2)/θ (quaternion vector part),
// a = (1-cosθ)/θ², b = (θ-sinθ)/θ³ (left Jacobian V = I + aΦ + bΦ²).
// Both branches are exposed so tests can verify continuity at the switch.
struct ExpCoeffs {
  double k;
  double a;
  double b;
};
ExpCoeffs exp_coeffs_closed(double theta);
ExpCoeffs exp_coeffs_series(double theta);

// c in V^{-1} = I - Φ/2 + cΦ².
double vinv_coeff_closed(double theta);
double vinv_coeff_series(double theta);

}  // namespace detail

}  // namespace posefuse
