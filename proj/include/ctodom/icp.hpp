#pragma once

#include "ctodom/liegroup.hpp"

namespace ctodom {

struct QueryPoint {
  Vec3 q = Vec3::Zero();  // sensor frame
  double time = 0.0;
  double alpha = 1.0;
};

struct Correspondence {
  Vec3 p = Vec3::Zero();  // map frame
  Vec3 n = Vec3::UnitZ();
  double alpha = 1.0;
};

enum class LossKind { none, cauchy, huber };

struct RobustLoss {
  LossKind kind = LossKind::none;
  double scale = 1.0;
};

struct Extrinsics {
  Pose t_vs;
  double beta = 0.0;
};

// alpha = (sigma2 - sigma3) / sigma1 for eigenvalues sigma1 >= sigma2 >=
// sigma3 of the neighborhood covariance.
double plane_weight(const Vec3& sigma);

// e = alpha n^T (p - T_vi(tau)^-1 T_vs q). jac_pose (1x6, optional) is the
// derivative wrt a left perturbation of T_vi(tau).
double p2plane_error(const QueryPoint& qp, const Correspondence& corr,
                     const Pose& pose_interp, const Extrinsics& ext,
                     Eigen::Matrix<double, 1, 6>* jac_pose = nullptr);

// dq = beta a a^T D q_h^odot Ad(T_sv) varpi(tau), a = q/|q|; zero for |q|=0.
Vec3 doppler_correction(const Vec3& q, const Vec6& varpi_interp,
                        const Extrinsics& ext);

// e = p - T_vi(tau)^-1 T_vs (q + dq). Raw residual; robust losses are applied
// as IRLS weights via robust_weight. Optional Jacobians wrt left pose
// perturbation and wrt varpi(tau).
Vec3 p2p_radar_error(const QueryPoint& qp, const Correspondence& corr,
                     const Pose& pose_interp, const Vec6& varpi_interp,
                     const Extrinsics& ext,
                     Eigen::Matrix<double, 3, 6>* jac_pose = nullptr,
                     Eigen::Matrix<double, 3, 6>* jac_vel = nullptr);

// IRLS weight in (0, 1].
double robust_weight(const RobustLoss& loss, double r);

}  // namespace ctodom
