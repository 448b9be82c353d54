#pragma once

#include <vector>

#include "ctodom/liegroup.hpp"

namespace ctodom {

inline constexpr double kGravityMag = 9.8066;

struct ImuSample {
  double time = 0.0;
  Vec3 omega = Vec3::Zero();
  Vec3 accel = Vec3::Zero();
};

struct ImuNoise {
  Mat3 r_omega = 1e-3 * Mat3::Identity();
  Mat3 r_accel = 1e-2 * Mat3::Identity();
  // Bias random-walk PSD, [accel(3), gyro(3)].
  Vec6 qb_diag = (Vec6() << 1e-4, 1e-4, 1e-4, 1e-6, 1e-6, 1e-6).finished();
};

// Rotation from the gravity-aligned frame to the inertial (map) frame,
// estimated at startup. g is expressed in the gravity-aligned frame.
struct GravityEstimate {
  Mat3 c_ig = Mat3::Identity();
  Vec3 g = Vec3(0.0, 0.0, -kGravityMag);

  Vec3 gravity_in_inertial() const { return c_ig * g; }
};

// e = omega_tilde - omega(tau) - b_omega, covariance R_omega.
Vec3 gyro_error(const ImuSample& sample, const Vec3& omega_interp,
                const Vec3& b_omega);

struct PreintegratedVelocity {
  Vec3 delta_nu = Vec3::Zero();
  Mat3 cov = Mat3::Zero();
  bool valid = false;
};

// Delta nu = sum_n (a_tilde_n + C_vi(tau_n) g_i - b_a) dt_n over samples in
// [tau_1, t_end]; dt_n from consecutive sample times, last interval closes at
// t_end. attitudes[n] is C_vi at samples[n].time from the current trajectory
// estimate. mode_2d drops the gravity term. Empty input yields valid = false.
PreintegratedVelocity preintegrate_velocity(
    const std::vector<ImuSample>& samples, const std::vector<Mat3>& attitudes,
    const Vec3& b_a, const Vec3& gravity_inertial, const Mat3& r_accel,
    double t_end, bool mode_2d = false);

// e = nu(t_{k+1}) - nu(tau_1) - delta_nu.
Vec3 accel_error(const Vec3& nu_k1, const Vec3& nu_tau1, const Vec3& delta_nu);

// Random-walk prior e = b_{k+1} - b_k, covariance Q_b dt.
Vec6 bias_prior_error(const Vec6& bias_k, const Vec6& bias_k1);
Mat6 bias_prior_cov(double dt, const Vec6& qb_diag);

struct GravityInitConfig {
  int min_samples = 50;
  // Weak prior pinning the yaw of c_ig; variance in rad^2.
  double rot_prior_var = 1e4;
  // Stationary-startup accel bias prior variance; <= 0 disables the prior.
  double bias_prior_var = 1.0;
  Mat3 r_accel = 1e-2 * Mat3::Identity();
  int max_iterations = 50;
};

struct GravityInit {
  GravityEstimate gravity;
  Vec3 b_a = Vec3::Zero();
};

// Least squares for (C_ig, b_a) from stationary accelerometer samples.
// Throws std::invalid_argument with fewer than cfg.min_samples samples.
GravityInit estimate_gravity(const std::vector<ImuSample>& samples,
                             const GravityInitConfig& cfg = {});

}  // namespace ctodom
