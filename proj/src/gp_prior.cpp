#include "ctodom/gp_prior.hpp"

namespace ctodom {

Mat12 transition(double t, double t_k) {
  Mat12 phi = Mat12::Identity();
  phi.topRightCorner<6, 6>() = (t - t_k) * Mat6::Identity();
  return phi;
}

Mat12 process_cov(double dt, const PriorHyperparams& q) {
  if (dt <= 0.0) throw std::invalid_argument("process_cov: dt must be > 0");
  const Mat6 Q = q.q_diag.asDiagonal();
  Mat12 out;
  out.topLeftCorner<6, 6>() = (dt * dt * dt / 3.0) * Q;
  out.topRightCorner<6, 6>() = (dt * dt / 2.0) * Q;
  out.bottomLeftCorner<6, 6>() = (dt * dt / 2.0) * Q;
  out.bottomRightCorner<6, 6>() = dt * Q;
  return out;
}

Mat12 process_cov_inv(double dt, const PriorHyperparams& q) {
  if (dt <= 0.0) throw std::invalid_argument("process_cov_inv: dt must be > 0");
  const Mat6 Qi = q.q_diag.cwiseInverse().asDiagonal();
  Mat12 out;
  out.topLeftCorner<6, 6>() = (12.0 / (dt * dt * dt)) * Qi;
  out.topRightCorner<6, 6>() = (-6.0 / (dt * dt)) * Qi;
  out.bottomLeftCorner<6, 6>() = (-6.0 / (dt * dt)) * Qi;
  out.bottomRightCorner<6, 6>() = (4.0 / dt) * Qi;
  return out;
}

Vec12 motion_prior_error(const TrajectoryKnot& knot_k,
                         const TrajectoryKnot& knot_k1,
                         MotionPriorJacobians* jac) {
  const double dt = knot_k1.time - knot_k.time;
  const Vec6 xi = se3_log(knot_k1.pose * knot_k.pose.inverse());
  const Mat6 Jinv = left_jacobian_inv(xi);

  Vec12 e;
  e.head<6>() = xi - dt * knot_k.velocity;
  e.tail<6>() = Jinv * knot_k1.velocity - knot_k.velocity;

  if (jac) {
    const Mat6 Tadj = (knot_k1.pose * knot_k.pose.inverse()).adjoint();
    const Mat6 half_w = 0.5 * curly_wedge(knot_k1.velocity);
    jac->wrt_pose_k.topRows<6>() = -Jinv * Tadj;
    jac->wrt_pose_k.bottomRows<6>() = -half_w * Jinv * Tadj;
    jac->wrt_pose_k1.topRows<6>() = Jinv;
    jac->wrt_pose_k1.bottomRows<6>() = half_w * Jinv;
    jac->wrt_vel_k.topRows<6>() = -dt * Mat6::Identity();
    jac->wrt_vel_k.bottomRows<6>() = -Mat6::Identity();
    jac->wrt_vel_k1.topRows<6>().setZero();
    jac->wrt_vel_k1.bottomRows<6>() = Jinv;
  }
  return e;
}

InterpMatrices interp_matrices(double tau, double t_k, double t_k1,
                               const PriorHyperparams& q) {
  InterpMatrices out;
  if (tau <= t_k) {
    out.lambda = Mat12::Identity();
    out.psi = Mat12::Zero();
    return out;
  }
  out.psi = process_cov(tau - t_k, q) * transition(t_k1, tau).transpose() *
            process_cov_inv(t_k1 - t_k, q);
  out.lambda = transition(tau, t_k) - out.psi * transition(t_k1, t_k);
  return out;
}

namespace {

// Local Markovian variables at the bracketing knots (appendix form).
void local_gammas(const TrajectoryKnot& k0, const TrajectoryKnot& k1,
                  Vec12& gamma0, Vec12& gamma1, Vec6& xi01) {
  xi01 = se3_log(k1.pose * k0.pose.inverse());
  gamma0.head<6>().setZero();
  gamma0.tail<6>() = k0.velocity;
  gamma1.head<6>() = xi01;
  gamma1.tail<6>() = left_jacobian_inv(xi01) * k1.velocity;
}

}  // namespace

InterpolatedState interpolate_state(const TrajectoryKnot& knot_k,
                                    const TrajectoryKnot& knot_k1, double tau,
                                    const PriorHyperparams& q) {
  if (tau <= knot_k.time) return {knot_k.pose, knot_k.velocity};
  if (tau >= knot_k1.time) return {knot_k1.pose, knot_k1.velocity};

  Vec12 gamma0, gamma1;
  Vec6 xi01;
  local_gammas(knot_k, knot_k1, gamma0, gamma1, xi01);
  const auto m = interp_matrices(tau, knot_k.time, knot_k1.time, q);

  const Vec12 gamma_tau_pose = m.lambda * gamma0 + m.psi * gamma1;
  const Vec6 xi_tau = gamma_tau_pose.head<6>();
  const Vec6 xi_dot_tau = gamma_tau_pose.tail<6>();

  InterpolatedState out;
  out.pose = se3_exp(xi_tau) * knot_k.pose;
  out.velocity = left_jacobian(xi_tau) * xi_dot_tau;
  return out;
}

InterpJacobians interp_jacobians(const TrajectoryKnot& knot_k,
                                 const TrajectoryKnot& knot_k1, double tau,
                                 const PriorHyperparams& q) {
  InterpJacobians J;
  if (tau <= knot_k.time) {
    J.pose_wrt_pose_k = Mat6::Identity();
    J.pose_wrt_vel_k = J.pose_wrt_pose_k1 = J.pose_wrt_vel_k1 = Mat6::Zero();
    J.vel_wrt_vel_k = Mat6::Identity();
    J.vel_wrt_pose_k = J.vel_wrt_pose_k1 = J.vel_wrt_vel_k1 = Mat6::Zero();
    return J;
  }
  if (tau >= knot_k1.time) {
    J.pose_wrt_pose_k1 = Mat6::Identity();
    J.pose_wrt_pose_k = J.pose_wrt_vel_k = J.pose_wrt_vel_k1 = Mat6::Zero();
    J.vel_wrt_vel_k1 = Mat6::Identity();
    J.vel_wrt_pose_k = J.vel_wrt_vel_k = J.vel_wrt_pose_k1 = Mat6::Zero();
    return J;
  }

  Vec12 gamma0, gamma1;
  Vec6 xi01;
  local_gammas(knot_k, knot_k1, gamma0, gamma1, xi01);
  const auto m = interp_matrices(tau, knot_k.time, knot_k1.time, q);
  const Vec12 gamma_tau = m.lambda * gamma0 + m.psi * gamma1;
  const Vec6 xi_tau = gamma_tau.head<6>();
  const Vec6 xi_dot_tau = gamma_tau.tail<6>();

  const Mat6 Jinv01 = left_jacobian_inv(xi01);
  const Mat6 Tadj01 = (knot_k1.pose * knot_k.pose.inverse()).adjoint();
  const Mat6 J_tau = left_jacobian(xi_tau);
  const Mat6 Tadj_tau = se3_exp(xi_tau).adjoint();

  const Mat6 lam12 = m.lambda.topRightCorner<6, 6>();
  const Mat6 lam22 = m.lambda.bottomRightCorner<6, 6>();
  const Mat6 psi11 = m.psi.topLeftCorner<6, 6>();
  const Mat6 psi12 = m.psi.topRightCorner<6, 6>();
  const Mat6 psi21 = m.psi.bottomLeftCorner<6, 6>();
  const Mat6 psi22 = m.psi.bottomRightCorner<6, 6>();

  const Mat6 w1_curly = curly_wedge(knot_k1.velocity);

  // d xi_k(tau) / d {eps_k, eta_k, eps_k1, eta_k1}
  const Mat6 dxi_de1 = psi11 * Jinv01 + 0.5 * psi12 * w1_curly * Jinv01;
  const Mat6 dxi_de0 = -dxi_de1 * Tadj01;
  const Mat6 dxi_dn0 = lam12;
  const Mat6 dxi_dn1 = psi12 * Jinv01;
  // d xi_dot_k(tau) / d {...}
  const Mat6 dxid_de1 = psi21 * Jinv01 + 0.5 * psi22 * w1_curly * Jinv01;
  const Mat6 dxid_de0 = -dxid_de1 * Tadj01;
  const Mat6 dxid_dn0 = lam22;
  const Mat6 dxid_dn1 = psi22 * Jinv01;

  J.pose_wrt_pose_k = J_tau * dxi_de0 + Tadj_tau;
  J.pose_wrt_vel_k = J_tau * dxi_dn0;
  J.pose_wrt_pose_k1 = J_tau * dxi_de1;
  J.pose_wrt_vel_k1 = J_tau * dxi_dn1;

  const Mat6 half_xid = 0.5 * curly_wedge(xi_dot_tau);
  J.vel_wrt_pose_k = J_tau * dxid_de0 - half_xid * dxi_de0;
  J.vel_wrt_vel_k = J_tau * dxid_dn0 - half_xid * dxi_dn0;
  J.vel_wrt_pose_k1 = J_tau * dxid_de1 - half_xid * dxi_de1;
  J.vel_wrt_vel_k1 = J_tau * dxid_dn1 - half_xid * dxi_dn1;
  return J;
}

}  // namespace ctodom
