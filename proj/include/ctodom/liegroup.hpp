#pragma once

#include <Eigen/Core>

namespace ctodom {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat46 = Eigen::Matrix<double, 4, 6>;

// se(3) twists are stacked [rho; psi] = [translational; rotational],
// matching the body-centric velocity ordering [nu; omega].

/// Rigid transform stored as rotation + translation so orthonormality
/// stays repairable. Maps points as p' = C*p + r.
struct Pose {
  Mat3 C = Mat3::Identity();
  Vec3 r = Vec3::Zero();

  Pose() = default;
  Pose(const Mat3& C_, const Vec3& r_) : C(C_), r(r_) {}

  Mat4 matrix() const;
  Pose inverse() const;
  Pose operator*(const Pose& rhs) const;
  Vec3 operator*(const Vec3& p) const { return C * p + r; }

  /// Ad(T) = [C, r^ C; 0, C]
  Mat6 adjoint() const;

  /// Projects C back onto SO(3) (polar decomposition).
  void orthonormalize();
};

Mat3 skew(const Vec3& v);

Mat3 so3_exp(const Vec3& psi);
Vec3 so3_log(const Mat3& C);
Mat3 orthonormalize(const Mat3& C);
Mat3 so3_left_jacobian(const Vec3& psi);
Mat3 so3_left_jacobian_inv(const Vec3& psi);

Pose se3_exp(const Vec6& xi);
Vec6 se3_log(const Pose& T);

/// Left Jacobian of SE(3): [J(psi), Q(xi); 0, J(psi)].
Mat6 left_jacobian(const Vec6& xi);
/// Exact inverse of the left Jacobian (closed form).
Mat6 left_jacobian_inv(const Vec6& xi);
/// First-order form 1 - x^curly/2 used inside interpolation-Jacobian
/// assembly; not a substitute for left_jacobian_inv.
Mat6 left_jacobian_inv_approx(const Vec6& xi);

/// xi^curly = ad(xi) = [psi^, rho^; 0, psi^]
Mat6 curly_wedge(const Vec6& xi);
/// xi^ = [psi^, rho; 0, 0]
Mat4 wedge(const Vec6& xi);
Vec6 vee(const Mat4& X);
/// p^odot with homogeneous p = [eps; eta], satisfying xi^ p = p^odot xi.
Mat46 odot(const Vec4& p);

}  // namespace ctodom
