#include "ctodom/imu.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace ctodom {

Vec3 gyro_error(const ImuSample& sample, const Vec3& omega_interp,
                const Vec3& b_omega) {
  return sample.omega - omega_interp - b_omega;
}

PreintegratedVelocity preintegrate_velocity(
    const std::vector<ImuSample>& samples, const std::vector<Mat3>& attitudes,
    const Vec3& b_a, const Vec3& gravity_inertial, const Mat3& r_accel,
    double t_end, bool mode_2d) {
  PreintegratedVelocity out;
  if (samples.empty()) return out;
  if (attitudes.size() != samples.size()) {
    throw std::invalid_argument("attitude count must match sample count");
  }
  out.valid = true;
  for (size_t n = 0; n < samples.size(); ++n) {
    const double t1 =
        (n + 1 < samples.size()) ? samples[n + 1].time : t_end;
    const double dt = t1 - samples[n].time;
    if (dt < 0.0) throw std::invalid_argument("samples not time-sorted");
    Vec3 a = samples[n].accel - b_a;
    if (mode_2d) {
      // 2D radar mode: no gravity estimate, so drop the vertical channel
      // entirely (it is dominated by the unremoved gravity signal).
      a.z() = 0.0;
    } else {
      a += attitudes[n] * gravity_inertial;
    }
    out.delta_nu += a * dt;
    out.cov += r_accel * dt * dt;
  }
  return out;
}

Vec3 accel_error(const Vec3& nu_k1, const Vec3& nu_tau1,
                 const Vec3& delta_nu) {
  return nu_k1 - nu_tau1 - delta_nu;
}

Vec6 bias_prior_error(const Vec6& bias_k, const Vec6& bias_k1) {
  return bias_k1 - bias_k;
}

Mat6 bias_prior_cov(double dt, const Vec6& qb_diag) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  return (dt * qb_diag).asDiagonal();
}

GravityInit estimate_gravity(const std::vector<ImuSample>& samples,
                             const GravityInitConfig& cfg) {
  if (static_cast<int>(samples.size()) < cfg.min_samples) {
    throw std::invalid_argument("too few samples for gravity estimation");
  }
  GravityInit est;
  const Mat3 w_meas = cfg.r_accel.inverse();
  const double w_rot = 1.0 / cfg.rot_prior_var;
  const double w_bias =
      (cfg.bias_prior_var > 0.0 && std::isfinite(cfg.bias_prior_var))
          ? 1.0 / cfg.bias_prior_var
          : 0.0;

  for (int it = 0; it < cfg.max_iterations; ++it) {
    Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
    Vec6 b = Vec6::Zero();

    const Vec3 cg = est.gravity.c_ig * est.gravity.g;
    for (const auto& s : samples) {
      const Vec3 e = s.accel + cg - est.b_a;
      Eigen::Matrix<double, 3, 6> J;
      J.leftCols<3>() = -skew(cg);
      J.rightCols<3>() = -Mat3::Identity();
      H += J.transpose() * w_meas * J;
      b -= J.transpose() * w_meas * e;
    }
    {
      const Vec3 r = so3_log(est.gravity.c_ig);
      const Mat3 Jr = so3_left_jacobian_inv(r);
      H.topLeftCorner<3, 3>() += w_rot * Jr.transpose() * Jr;
      b.head<3>() -= w_rot * Jr.transpose() * r;
    }
    H.bottomRightCorner<3, 3>() += w_bias * Mat3::Identity();
    b.tail<3>() -= w_bias * est.b_a;

    const Vec6 dx = H.ldlt().solve(b);
    est.gravity.c_ig = so3_exp(Vec3(dx.head<3>())) * est.gravity.c_ig;
    est.b_a += dx.tail<3>();
    if (dx.norm() < 1e-12) break;
  }
  est.gravity.c_ig = orthonormalize(est.gravity.c_ig);
  return est;
}

}  // namespace ctodom
