#include "ctodom/icp.hpp"

#include <algorithm>
#include <cmath>

namespace ctodom {

double plane_weight(const Vec3& sigma) {
  if (sigma(0) <= 0.0) return 0.0;
  return std::clamp((sigma(1) - sigma(2)) / sigma(0), 0.0, 1.0);
}

double p2plane_error(const QueryPoint& qp, const Correspondence& corr,
                     const Pose& pose_interp, const Extrinsics& ext,
                     Eigen::Matrix<double, 1, 6>* jac_pose) {
  const Vec3 q_v = ext.t_vs * qp.q;
  const Pose t_iv = pose_interp.inverse();
  const Vec3 q_i = t_iv * q_v;
  const double a = qp.alpha * corr.alpha;
  if (jac_pose) {
    Vec4 q_vh;
    q_vh << q_v, 1.0;
    Eigen::Matrix<double, 3, 6> dq =
        t_iv.matrix().topRows<3>() * odot(q_vh);
    *jac_pose = a * corr.n.transpose() * dq;
  }
  return a * corr.n.dot(corr.p - q_i);
}

Vec3 doppler_correction(const Vec3& q, const Vec6& varpi_interp,
                        const Extrinsics& ext) {
  const double r = q.norm();
  if (r <= 0.0) return Vec3::Zero();
  const Vec3 a = q / r;
  Vec4 qh;
  qh << q, 1.0;
  const Vec6 varpi_s = ext.t_vs.inverse().adjoint() * varpi_interp;
  const Vec3 v = (odot(qh) * varpi_s).head<3>();
  return ext.beta * a * a.dot(v);
}

Vec3 p2p_radar_error(const QueryPoint& qp, const Correspondence& corr,
                     const Pose& pose_interp, const Vec6& varpi_interp,
                     const Extrinsics& ext,
                     Eigen::Matrix<double, 3, 6>* jac_pose,
                     Eigen::Matrix<double, 3, 6>* jac_vel) {
  const Vec3 dq = doppler_correction(qp.q, varpi_interp, ext);
  const Vec3 q_v = ext.t_vs * (qp.q + dq);
  const Pose t_iv = pose_interp.inverse();
  if (jac_pose) {
    Vec4 q_vh;
    q_vh << q_v, 1.0;
    *jac_pose = t_iv.matrix().topRows<3>() * odot(q_vh);
  }
  if (jac_vel) {
    jac_vel->setZero();
    const double r = qp.q.norm();
    if (r > 0.0) {
      const Vec3 a = qp.q / r;
      Vec4 qh;
      qh << qp.q, 1.0;
      Eigen::Matrix<double, 3, 6> ddq =
          ext.beta * a * a.transpose() *
          (odot(qh) * ext.t_vs.inverse().adjoint()).topRows<3>();
      *jac_vel = -t_iv.C * ext.t_vs.C * ddq;
    }
  }
  return corr.p - t_iv * q_v;
}

double robust_weight(const RobustLoss& loss, double r) {
  r = std::abs(r);
  switch (loss.kind) {
    case LossKind::none:
      return 1.0;
    case LossKind::cauchy: {
      const double u = r / loss.scale;
      return 1.0 / (1.0 + u * u);
    }
    case LossKind::huber:
      return (r <= loss.scale) ? 1.0 : loss.scale / r;
  }
  return 1.0;
}

}  // namespace ctodom
