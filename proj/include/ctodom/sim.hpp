#pragma once

#include <cstdint>
#include <vector>

#include "ctodom/frontend.hpp"
#include "ctodom/imu.hpp"
#include "ctodom/liegroup.hpp"

namespace ctodom {

// State convention used throughout: T(t) maps inertial (map) coordinates to
// vehicle coordinates, and the velocity state is the left twist
// varpi = (Tdot T^-1)^vee, which is the negative of the physical body rates.
// Physical gyro rate = -varpi.tail(3), physical body velocity =
// -varpi.head(3).

enum class MotionProfile {
  stationary,
  smooth_drive,
  fast_drive,
  spin_aggressive
};

struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double extent = 1e9;  // half-width of the patch around `point`
};

struct World {
  std::vector<Plane> planes;
  std::vector<Vec3> landmarks;  // radar reflectors, z = 0
};

// Ground plane plus four walls at +-half, and a ring of radar reflectors.
World make_box_world(double half = 50.0, double height = 4.0,
                     int num_landmarks = 24, double landmark_radius = 35.0);

struct SimConfig {
  double duration = 60.0;
  double imu_rate = 200.0;
  double lidar_rate = 10.0;
  int lidar_beams = 12;
  int lidar_azimuths = 180;
  double lidar_max_range = 120.0;
  double lidar_range_std = 0.0;
  uint32_t radar_azimuths = 200;
  uint32_t radar_range_bins = 600;
  double radar_range_resolution = 0.1;
  double radar_scan_period = 0.25;
  double beta = 0.049;
  double gyro_noise_std = 0.0;
  double accel_noise_std = 0.0;
  Vec6 qb_diag = Vec6::Zero();  // bias random-walk PSD [accel, gyro]
  uint64_t seed = 0;
  Pose t_vs;  // sensor-to-vehicle extrinsic
  MotionProfile profile = MotionProfile::smooth_drive;
};

// Analytic ground truth: planar path p(t) with yaw theta(t), exact state
// twist and its derivative available at any t.
class GroundTruthTrajectory {
 public:
  explicit GroundTruthTrajectory(MotionProfile profile);

  Pose pose(double t) const;          // T_vi, state convention
  Vec6 velocity(double t) const;      // left twist (see header note)
  Vec6 acceleration(double t) const;  // d(velocity)/dt

  // Physical quantities (for IMU synthesis and sanity checks).
  Vec3 position(double t) const;  // vehicle position in inertial frame
  double yaw(double t) const;
  Vec3 body_rate(double t) const;  // gyro ground truth

  MotionProfile profile() const { return profile_; }

 private:
  MotionProfile profile_;
};

// Inverse of the measurement model: omega = physical rate + b_w + noise,
// accel = a_v - C_vi g_i + b_a + noise with a_v the derivative of the physical
// body velocity as represented by the state (-d/dt varpi.head(3)).
std::vector<ImuSample> sample_imu(const GroundTruthTrajectory& traj,
                                  const SimConfig& cfg);

// Spinning lidar against the planes; points in the sensor frame with
// per-point times spread over one revolution starting at t_scan.
LidarFrame render_lidar(const GroundTruthTrajectory& traj, const World& world,
                        double t_scan, const SimConfig& cfg);

// 2D spinning radar against the landmarks with Doppler range distortion.
PolarScan render_radar(const GroundTruthTrajectory& traj, const World& world,
                       double t_scan, const SimConfig& cfg);

// Smallest positive ray-plane hit within the patch extent; negative if none.
double ray_hit(const Vec3& origin, const Vec3& dir, const Plane& plane);

}  // namespace ctodom
