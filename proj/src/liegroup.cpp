#include "ctodom/liegroup.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace ctodom {

namespace {
constexpr double kSmallAngle = 1e-8;  // rad; below this use Taylor series
constexpr double kNearPi = 1e-6;
}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return S;
}

Mat4 Pose::matrix() const {
  Mat4 T = Mat4::Identity();
  T.topLeftCorner<3, 3>() = C;
  T.topRightCorner<3, 1>() = r;
  return T;
}

Pose Pose::inverse() const { return Pose(C.transpose(), -(C.transpose() * r)); }

Pose Pose::operator*(const Pose& rhs) const {
  return Pose(C * rhs.C, C * rhs.r + r);
}

Mat6 Pose::adjoint() const {
  Mat6 Ad = Mat6::Zero();
  Ad.topLeftCorner<3, 3>() = C;
  Ad.bottomRightCorner<3, 3>() = C;
  Ad.topRightCorner<3, 3>() = skew(r) * C;
  return Ad;
}

Mat3 orthonormalize(const Mat3& C) {
  Eigen::JacobiSVD<Mat3> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 R = svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0.0) {
    Mat3 D = Mat3::Identity();
    D(2, 2) = -1.0;
    R = svd.matrixU() * D * svd.matrixV().transpose();
  }
  return R;
}

void Pose::orthonormalize() { C = ctodom::orthonormalize(C); }

Mat3 so3_exp(const Vec3& psi) {
  const double angle = psi.norm();
  const Mat3 S = skew(psi);
  if (angle < kSmallAngle) {
    return Mat3::Identity() + S + 0.5 * S * S + (1.0 / 6.0) * S * S * S;
  }
  const double s = std::sin(angle), c = std::cos(angle);
  return Mat3::Identity() + (s / angle) * S +
         ((1.0 - c) / (angle * angle)) * S * S;
}

Vec3 so3_log(const Mat3& C) {
  const double tr = C.trace();
  const double cos_angle = std::clamp(0.5 * (tr - 1.0), -1.0, 1.0);
  const double angle = std::acos(cos_angle);
  Vec3 w(C(2, 1) - C(1, 2), C(0, 2) - C(2, 0), C(1, 0) - C(0, 1));
  if (angle < kSmallAngle) {
    return 0.5 * w;
  }
  if (angle < M_PI - kNearPi) {
    return (angle / (2.0 * std::sin(angle))) * w;
  }
  // Angle at or near pi: sin(angle) ~ 0 and acos is ill-conditioned, so
  // recover the angle from the antisymmetric part and the axis from the
  // symmetric part C ~ 2*a*a^T - 1 using the largest diagonal entry.
  const double near_pi_angle =
      M_PI - std::asin(std::clamp(0.5 * w.norm(), 0.0, 1.0));
  const Mat3 B = 0.5 * (C + Mat3::Identity());
  int i = 0;
  B.diagonal().maxCoeff(&i);
  Vec3 axis = B.col(i) / std::sqrt(B(i, i));
  // Sign convention: align with the antisymmetric part when it is usable,
  // otherwise make the largest-magnitude component positive.
  if (w.norm() > 1e-9) {
    if (axis.dot(w) < 0.0) axis = -axis;
  } else {
    int j = 0;
    axis.cwiseAbs().maxCoeff(&j);
    if (axis(j) < 0.0) axis = -axis;
  }
  return near_pi_angle * axis.normalized();
}

Mat3 so3_left_jacobian(const Vec3& psi) {
  const double angle = psi.norm();
  const Mat3 S = skew(psi);
  if (angle < kSmallAngle) {
    return Mat3::Identity() + 0.5 * S + (1.0 / 6.0) * S * S +
           (1.0 / 24.0) * S * S * S;
  }
  const double a2 = angle * angle;
  const double s = std::sin(angle), c = std::cos(angle);
  return Mat3::Identity() + ((1.0 - c) / a2) * S + ((angle - s) / (a2 * angle)) * S * S;
}

Mat3 so3_left_jacobian_inv(const Vec3& psi) {
  const double angle = psi.norm();
  const Mat3 S = skew(psi);
  if (angle < kSmallAngle) {
    return Mat3::Identity() - 0.5 * S + (1.0 / 12.0) * S * S;
  }
  const double half = 0.5 * angle;
  const double cot_half = std::cos(half) / std::sin(half);
  const double coef = (1.0 - half * cot_half) / (angle * angle);
  return Mat3::Identity() - 0.5 * S + coef * S * S;
}

Pose se3_exp(const Vec6& xi) {
  const Vec3 rho = xi.head<3>();
  const Vec3 psi = xi.tail<3>();
  return Pose(so3_exp(psi), so3_left_jacobian(psi) * rho);
}

Vec6 se3_log(const Pose& T) {
  Vec6 xi;
  const Vec3 psi = so3_log(T.C);
  xi.tail<3>() = psi;
  xi.head<3>() = so3_left_jacobian_inv(psi) * T.r;
  return xi;
}

namespace {

// Upper-right block of the SE(3) left Jacobian (Q matrix).
Mat3 left_jacobian_q(const Vec6& xi) {
  const Vec3 rho = xi.head<3>();
  const Vec3 psi = xi.tail<3>();
  const Mat3 rx = skew(rho);
  const Mat3 px = skew(psi);
  const double angle = psi.norm();
  double c1, c2, c3;  // series coefficients
  if (angle < 1e-4) {
    const double a2 = angle * angle;
    c1 = 1.0 / 6.0 - a2 / 120.0;
    c2 = 1.0 / 24.0 - a2 / 720.0;
    c3 = -1.0 / 120.0 + a2 / 5040.0;
  } else {
    const double a2 = angle * angle;
    const double a3 = a2 * angle;
    const double s = std::sin(angle), c = std::cos(angle);
    c1 = (angle - s) / a3;
    c2 = (0.5 * a2 + c - 1.0) / (a2 * a2);
    c3 = (angle - s - a3 / 6.0) / (a2 * a3);
  }
  const Mat3 pxrx = px * rx;
  const Mat3 rxpx = rx * px;
  const Mat3 pxrxpx = pxrx * px;
  return 0.5 * rx + c1 * (pxrx + rxpx + pxrxpx) +
         c2 * (px * pxrx + rxpx * px - 3.0 * pxrxpx) +
         0.5 * (c2 + 3.0 * c3) * (pxrxpx * px + px * pxrxpx);
}

}  // namespace

Mat6 left_jacobian(const Vec6& xi) {
  const Mat3 J = so3_left_jacobian(xi.tail<3>());
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = J;
  out.bottomRightCorner<3, 3>() = J;
  out.topRightCorner<3, 3>() = left_jacobian_q(xi);
  return out;
}

Mat6 left_jacobian_inv(const Vec6& xi) {
  const Mat3 Jinv = so3_left_jacobian_inv(xi.tail<3>());
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = Jinv;
  out.bottomRightCorner<3, 3>() = Jinv;
  out.topRightCorner<3, 3>() = -Jinv * left_jacobian_q(xi) * Jinv;
  return out;
}

Mat6 left_jacobian_inv_approx(const Vec6& xi) {
  return Mat6::Identity() - 0.5 * curly_wedge(xi);
}

Mat6 curly_wedge(const Vec6& xi) {
  const Mat3 rx = skew(xi.head<3>());
  const Mat3 px = skew(xi.tail<3>());
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = px;
  out.bottomRightCorner<3, 3>() = px;
  out.topRightCorner<3, 3>() = rx;
  return out;
}

Mat4 wedge(const Vec6& xi) {
  Mat4 out = Mat4::Zero();
  out.topLeftCorner<3, 3>() = skew(xi.tail<3>());
  out.topRightCorner<3, 1>() = xi.head<3>();
  return out;
}

Vec6 vee(const Mat4& X) {
  Vec6 xi;
  xi.head<3>() = X.topRightCorner<3, 1>();
  xi.tail<3>() = Vec3(X(2, 1), X(0, 2), X(1, 0));
  return xi;
}

Mat46 odot(const Vec4& p) {
  Mat46 out = Mat46::Zero();
  out.topLeftCorner<3, 3>() = p(3) * Mat3::Identity();
  out.topRightCorner<3, 3>() = -skew(p.head<3>());
  return out;
}

}  // namespace ctodom
