#include "ctodom/sim.hpp"

#include <cmath>
#include <random>

#include "ctodom/icp.hpp"

namespace ctodom {

namespace {

struct PathState {
  Vec3 p = Vec3::Zero();
  Vec3 pd = Vec3::Zero();
  Vec3 pdd = Vec3::Zero();
  double th = 0.0;
  double thd = 0.0;
  double thdd = 0.0;
};

PathState eval_path(MotionProfile profile, double t) {
  PathState s;
  switch (profile) {
    case MotionProfile::stationary:
      break;
    case MotionProfile::smooth_drive: {
      // Circle at constant speed: R = 20 m, w = 0.25 rad/s, v = 5 m/s.
      const double R = 20.0, w = 0.25;
      s.p = Vec3(R * std::cos(w * t), R * std::sin(w * t), 0.0);
      s.pd = Vec3(-R * w * std::sin(w * t), R * w * std::cos(w * t), 0.0);
      s.pdd = -w * w * s.p;
      s.th = w * t + M_PI / 2.0;
      s.thd = w;
      s.thdd = 0.0;
      break;
    }
    case MotionProfile::fast_drive: {
      // Same circle, four times faster: R = 20 m, w = 1.0 rad/s, v = 20 m/s.
      const double R = 20.0, w = 1.0;
      s.p = Vec3(R * std::cos(w * t), R * std::sin(w * t), 0.0);
      s.pd = Vec3(-R * w * std::sin(w * t), R * w * std::cos(w * t), 0.0);
      s.pdd = -w * w * s.p;
      s.th = w * t + M_PI / 2.0;
      s.thd = w;
      s.thdd = 0.0;
      break;
    }
    case MotionProfile::spin_aggressive: {
      // Fast, time-varying yaw with a gentle sway in x.
      const double A = 0.5, wp = 1.0;
      s.p = Vec3(A * std::sin(wp * t), 0.0, 0.0);
      s.pd = Vec3(A * wp * std::cos(wp * t), 0.0, 0.0);
      s.pdd = Vec3(-A * wp * wp * std::sin(wp * t), 0.0, 0.0);
      s.th = 2.5 * t + 0.25 * std::sin(2.0 * t);
      s.thd = 2.5 + 0.5 * std::cos(2.0 * t);
      s.thdd = -std::sin(2.0 * t);
      break;
    }
  }
  return s;
}

Mat3 yaw_rot(double th) {
  Mat3 C = Mat3::Identity();
  const double c = std::cos(th), s = std::sin(th);
  C(0, 0) = c;
  C(0, 1) = -s;
  C(1, 0) = s;
  C(1, 1) = c;
  return C;  // C_iv
}

}  // namespace

World make_box_world(double half, double height, int num_landmarks,
                     double landmark_radius) {
  World w;
  const double ground_z = -1.5;
  w.planes.push_back({Vec3(0, 0, ground_z), Vec3::UnitZ(), 2.0 * half});
  w.planes.push_back({Vec3(half, 0, 0), -Vec3::UnitX(), 1.5 * half});
  w.planes.push_back({Vec3(-half, 0, 0), Vec3::UnitX(), 1.5 * half});
  w.planes.push_back({Vec3(0, half, 0), -Vec3::UnitY(), 1.5 * half});
  w.planes.push_back({Vec3(0, -half, 0), Vec3::UnitY(), 1.5 * half});
  w.planes.push_back({Vec3(0, 0, height), -Vec3::UnitZ(), 2.0 * half});
  for (int i = 0; i < num_landmarks; ++i) {
    const double a = 2.0 * M_PI * i / num_landmarks;
    // Stagger the radii so the constellation is not a pure circle, which
    // would leave radar registration nearly rotation-degenerate.
    const double r = landmark_radius * (0.55 + 0.45 * ((i * 7) % 5) / 4.0);
    w.landmarks.push_back(Vec3(r * std::cos(a), r * std::sin(a), 0.0));
  }
  return w;
}

GroundTruthTrajectory::GroundTruthTrajectory(MotionProfile profile)
    : profile_(profile) {}

Pose GroundTruthTrajectory::pose(double t) const {
  const PathState s = eval_path(profile_, t);
  const Mat3 c_vi = yaw_rot(s.th).transpose();
  return Pose(c_vi, (-c_vi * s.p).eval());
}

Vec6 GroundTruthTrajectory::velocity(double t) const {
  const PathState s = eval_path(profile_, t);
  const Mat3 c_vi = yaw_rot(s.th).transpose();
  Vec6 w;
  w.head<3>() = -c_vi * s.pd;
  w.tail<3>() = Vec3(0.0, 0.0, -s.thd);
  return w;
}

Vec6 GroundTruthTrajectory::acceleration(double t) const {
  const PathState s = eval_path(profile_, t);
  const Mat3 c_vi = yaw_rot(s.th).transpose();
  const Vec3 w_phys(0.0, 0.0, s.thd);
  Vec6 a;
  a.head<3>() = skew(w_phys) * (c_vi * s.pd) - c_vi * s.pdd;
  a.tail<3>() = Vec3(0.0, 0.0, -s.thdd);
  return a;
}

Vec3 GroundTruthTrajectory::position(double t) const {
  return eval_path(profile_, t).p;
}

double GroundTruthTrajectory::yaw(double t) const {
  return eval_path(profile_, t).th;
}

Vec3 GroundTruthTrajectory::body_rate(double t) const {
  return Vec3(0.0, 0.0, eval_path(profile_, t).thd);
}

std::vector<ImuSample> sample_imu(const GroundTruthTrajectory& traj,
                                  const SimConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vec3 g_i(0.0, 0.0, -kGravityMag);
  const double dt = 1.0 / cfg.imu_rate;
  const int n = static_cast<int>(std::floor(cfg.duration * cfg.imu_rate));

  Vec3 b_a = Vec3::Zero(), b_w = Vec3::Zero();
  std::vector<ImuSample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    ImuSample s;
    s.time = t;
    const Mat3 c_vi = traj.pose(t).C;
    const Vec3 a_v = -traj.acceleration(t).head<3>();
    s.accel = a_v - c_vi * g_i + b_a +
              cfg.accel_noise_std * Vec3(gauss(rng), gauss(rng), gauss(rng));
    s.omega = traj.body_rate(t) + b_w +
              cfg.gyro_noise_std * Vec3(gauss(rng), gauss(rng), gauss(rng));
    out.push_back(s);
    for (int k = 0; k < 3; ++k) {
      b_a(k) += std::sqrt(cfg.qb_diag(k) * dt) * gauss(rng);
      b_w(k) += std::sqrt(cfg.qb_diag(3 + k) * dt) * gauss(rng);
    }
  }
  return out;
}

double ray_hit(const Vec3& origin, const Vec3& dir, const Plane& plane) {
  const double denom = plane.normal.dot(dir);
  if (std::abs(denom) < 1e-12) return -1.0;
  const double t = plane.normal.dot(plane.point - origin) / denom;
  if (t <= 1e-6) return -1.0;
  const Vec3 hit = origin + t * dir;
  if ((hit - plane.point).norm() > plane.extent) return -1.0;
  return t;
}

LidarFrame render_lidar(const GroundTruthTrajectory& traj, const World& world,
                        double t_scan, const SimConfig& cfg) {
  LidarFrame frame;
  const double period = 1.0 / cfg.lidar_rate;
  frame.t_start = t_scan;
  frame.t_end = t_scan + period;

  std::mt19937_64 rng(cfg.seed ^
                      static_cast<uint64_t>(std::llround(t_scan * 1e6)));
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double elev_min = -20.0 * M_PI / 180.0;
  const double elev_max = 2.0 * M_PI / 180.0;
  for (int a = 0; a < cfg.lidar_azimuths; ++a) {
    const double tau = t_scan + period * a / cfg.lidar_azimuths;
    const Pose t_is = traj.pose(tau).inverse() * cfg.t_vs;  // sensor-to-map
    const double phi = 2.0 * M_PI * a / cfg.lidar_azimuths;
    for (int b = 0; b < cfg.lidar_beams; ++b) {
      const double eps =
          elev_min + (elev_max - elev_min) * b /
                         std::max(1, cfg.lidar_beams - 1);
      const Vec3 d_s(std::cos(phi) * std::cos(eps),
                     std::sin(phi) * std::cos(eps), std::sin(eps));
      const Vec3 d_w = t_is.C * d_s;
      double best = -1.0;
      for (const auto& plane : world.planes) {
        const double t = ray_hit(t_is.r, d_w, plane);
        if (t > 0.0 && (best < 0.0 || t < best)) best = t;
      }
      if (best < 0.0 || best > cfg.lidar_max_range) continue;
      const double r = best + cfg.lidar_range_std * gauss(rng);
      frame.points.push_back({r * d_s, 1.0, tau});
    }
  }
  return frame;
}

PolarScan render_radar(const GroundTruthTrajectory& traj, const World& world,
                       double t_scan, const SimConfig& cfg) {
  PolarScan scan;
  scan.num_azimuths = cfg.radar_azimuths;
  scan.num_range_bins = cfg.radar_range_bins;
  scan.range_resolution = cfg.radar_range_resolution;
  scan.power.assign(cfg.radar_azimuths * cfg.radar_range_bins, 0);
  scan.azimuth_times.resize(cfg.radar_azimuths);
  scan.azimuth_angles.resize(cfg.radar_azimuths);

  Extrinsics ext;
  ext.t_vs = cfg.t_vs;
  ext.beta = cfg.beta;
  const double half_beam = M_PI / cfg.radar_azimuths;

  for (uint32_t a = 0; a < cfg.radar_azimuths; ++a) {
    const double tau =
        t_scan + cfg.radar_scan_period * a / cfg.radar_azimuths;
    const double theta = 2.0 * M_PI * a / cfg.radar_azimuths;
    scan.azimuth_times[a] = tau;
    scan.azimuth_angles[a] = theta;
    const Pose t_sv = cfg.t_vs.inverse();
    const Pose t_si = t_sv * traj.pose(tau);  // map-to-sensor
    const Vec6 varpi = traj.velocity(tau);
    for (const auto& lm : world.landmarks) {
      Vec3 q = t_si * lm;
      q.z() = 0.0;
      const double r_true = q.norm();
      if (r_true < 1e-6) continue;
      double bearing = std::atan2(q.y(), q.x());
      double diff = std::remainder(bearing - theta, 2.0 * M_PI);
      if (std::abs(diff) > half_beam) continue;
      const Vec3 dq = doppler_correction(q, varpi, ext);
      const double r_meas = r_true - dq.dot(q / r_true);
      const int bin = static_cast<int>(
          std::lround(r_meas / cfg.radar_range_resolution - 0.5));
      if (bin < 0 || bin >= static_cast<int>(cfg.radar_range_bins)) continue;
      scan.power[a * cfg.radar_range_bins + bin] = 255;
    }
  }
  return scan;
}

}  // namespace ctodom
