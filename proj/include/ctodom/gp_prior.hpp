#pragma once

#include <stdexcept>

#include "ctodom/liegroup.hpp"

namespace ctodom {

using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

/// Power-spectral densities of the white-noise-on-acceleration prior
/// (translation first, rotation second) and of the bias random walk.
struct PriorHyperparams {
  Vec6 q_diag = (Vec6() << 50.0, 50.0, 50.0, 5.0, 5.0, 5.0).finished();
  Vec6 qb_diag = (Vec6() << 1e-2, 1e-2, 1e-2, 1e-4, 1e-4, 1e-4).finished();
};

/// Full state at one estimation time: pose T_vi (world-to-vehicle),
/// body-centric velocity [nu; omega], IMU biases [b_a; b_omega].
struct TrajectoryKnot {
  double time = 0.0;
  Pose pose;
  Vec6 velocity = Vec6::Zero();
  Vec6 bias = Vec6::Zero();
};

/// Transition matrix Phi(t, t_k) of the local constant-velocity LTI SDE.
Mat12 transition(double t, double t_k);

/// Process covariance Q_k over an interval dt > 0.
Mat12 process_cov(double dt, const PriorHyperparams& q);
/// Analytic inverse of process_cov.
Mat12 process_cov_inv(double dt, const PriorHyperparams& q);

struct MotionPriorJacobians {
  // Blocks of d(error)/d(perturbation), 12x6 each.
  Eigen::Matrix<double, 12, 6> wrt_pose_k, wrt_vel_k, wrt_pose_k1, wrt_vel_k1;
};

/// Motion-prior residual between consecutive knots (zero iff the pair is
/// constant-velocity consistent); covariance is process_cov(dt).
Vec12 motion_prior_error(const TrajectoryKnot& knot_k,
                         const TrajectoryKnot& knot_k1,
                         MotionPriorJacobians* jac = nullptr);

/// GP interpolation matrices (Lambda, Psi) for t_k <= tau <= t_k1.
struct InterpMatrices {
  Mat12 lambda;
  Mat12 psi;
};
InterpMatrices interp_matrices(double tau, double t_k, double t_k1,
                               const PriorHyperparams& q);

struct InterpolatedState {
  Pose pose;
  Vec6 velocity;
};

/// Posterior mean interpolation between two knots; exact at the endpoints.
InterpolatedState interpolate_state(const TrajectoryKnot& knot_k,
                                    const TrajectoryKnot& knot_k1, double tau,
                                    const PriorHyperparams& q);

/// First-order sensitivities of the interpolated pose/velocity to the
/// bracketing knot perturbations (pose left-perturbation eps, additive
/// velocity eta). Uses the 1 - x^curly/2 inverse-Jacobian form.
struct InterpJacobians {
  Mat6 pose_wrt_pose_k, pose_wrt_vel_k, pose_wrt_pose_k1, pose_wrt_vel_k1;
  Mat6 vel_wrt_pose_k, vel_wrt_vel_k, vel_wrt_pose_k1, vel_wrt_vel_k1;
};
InterpJacobians interp_jacobians(const TrajectoryKnot& knot_k,
                                 const TrajectoryKnot& knot_k1, double tau,
                                 const PriorHyperparams& q);

}  // namespace ctodom
