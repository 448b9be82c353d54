#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ctodom/icp.hpp"
#include "ctodom/sim.hpp"
#include "test_util.hpp"

using namespace ctodom;
using namespace ctodom::testutil;

TEST_CASE("trajectory profiles: basic shape") {
  GroundTruthTrajectory stat(MotionProfile::stationary);
  CHECK((stat.pose(0.0).matrix() - stat.pose(13.7).matrix()).norm() == 0.0);
  CHECK(stat.velocity(5.0).norm() == 0.0);
  CHECK(stat.acceleration(5.0).norm() == 0.0);

  GroundTruthTrajectory circle(MotionProfile::smooth_drive);
  for (double t : {0.0, 3.3, 17.9, 42.0}) {
    Vec6 w = circle.velocity(t);
    CHECK(w.head<3>().norm() == doctest::Approx(5.0));
    CHECK(w(5) == doctest::Approx(-0.25));
    CHECK(circle.body_rate(t).z() == doctest::Approx(0.25));
  }

  GroundTruthTrajectory spin(MotionProfile::spin_aggressive);
  double max_rate = 0.0;
  for (double t = 0.0; t < 10.0; t += 0.01)
    max_rate = std::max(max_rate, spin.body_rate(t).norm());
  CHECK(max_rate >= 2.0);
}

TEST_CASE("trajectory: velocity and acceleration match finite differences") {
  const double h = 1e-6;
  for (auto profile : {MotionProfile::smooth_drive,
                       MotionProfile::spin_aggressive}) {
    GroundTruthTrajectory traj(profile);
    for (double t : {0.7, 5.3, 20.1}) {
      Pose Tp = traj.pose(t + h), Tm = traj.pose(t - h);
      Vec6 w_fd = se3_log(Tp * Tm.inverse()) / (2.0 * h);
      CHECK(rel_err(w_fd, traj.velocity(t)) < 1e-6);
      Vec6 a_fd = (traj.velocity(t + h) - traj.velocity(t - h)) / (2.0 * h);
      CHECK(rel_err(a_fd, traj.acceleration(t)) < 1e-5);
    }
  }
}

TEST_CASE("imu synthesis: stationary and circle, determinism, bias walk") {
  SimConfig cfg;
  cfg.duration = 1.0;
  GroundTruthTrajectory stat(MotionProfile::stationary);
  auto samples = sample_imu(stat, cfg);
  REQUIRE(samples.size() == 200);
  for (const auto& s : samples) {
    CHECK((s.accel - Vec3(0, 0, kGravityMag)).norm() < 1e-12);
    CHECK(s.omega.norm() < 1e-12);
  }

  GroundTruthTrajectory circle(MotionProfile::smooth_drive);
  auto cs = sample_imu(circle, cfg);
  for (const auto& s : cs) CHECK(s.omega.z() == doctest::Approx(0.25));

  cfg.gyro_noise_std = 0.01;
  cfg.accel_noise_std = 0.05;
  cfg.seed = 77;
  auto a = sample_imu(circle, cfg);
  auto b = sample_imu(circle, cfg);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].accel - b[i].accel).norm() == 0.0);
    CHECK((a[i].omega - b[i].omega).norm() == 0.0);
  }

  // Bias random walk: variance of the gyro bias grows roughly linearly.
  SimConfig bw;
  bw.duration = 8.0;
  bw.qb_diag << 0, 0, 0, 1e-4, 1e-4, 1e-4;
  double var_half = 0.0, var_full = 0.0;
  const int runs = 300;
  for (int r = 0; r < runs; ++r) {
    bw.seed = 1000 + r;
    GroundTruthTrajectory st(MotionProfile::stationary);
    auto ss = sample_imu(st, bw);
    var_half += ss[ss.size() / 2].omega.squaredNorm();
    var_full += ss.back().omega.squaredNorm();
  }
  CHECK(var_full / var_half == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("lidar rendering: points land on planes after deskew") {
  World world = make_box_world(30.0);
  SimConfig cfg;
  cfg.lidar_azimuths = 90;
  cfg.lidar_beams = 8;

  auto on_plane = [&](const Vec3& p_world) {
    double best = 1e9;
    for (const auto& pl : world.planes)
      best = std::min(best, std::abs(pl.normal.dot(p_world - pl.point)));
    return best;
  };

  GroundTruthTrajectory stat(MotionProfile::stationary);
  auto f = render_lidar(stat, world, 0.0, cfg);
  REQUIRE(f.points.size() > 100);
  for (const auto& pt : f.points) {
    Vec3 w = stat.pose(pt.time).inverse() * (cfg.t_vs * pt.p);
    CHECK(on_plane(w) < 1e-9);
    CHECK(pt.time >= f.t_start);
    CHECK(pt.time <= f.t_end);
  }

  GroundTruthTrajectory circle(MotionProfile::smooth_drive);
  auto g = render_lidar(circle, world, 4.0, cfg);
  REQUIRE(g.points.size() > 100);
  double worst_raw = 0.0;
  for (const auto& pt : g.points) {
    // Ground-truth deskew puts every point back on a plane.
    Vec3 w = circle.pose(pt.time).inverse() * (cfg.t_vs * pt.p);
    CHECK(on_plane(w) < 1e-9);
    // Naive single-pose compensation leaves motion distortion behind.
    Vec3 raw = circle.pose(4.0).inverse() * (cfg.t_vs * pt.p);
    worst_raw = std::max(worst_raw, on_plane(raw));
  }
  CHECK(worst_raw > 0.05);

  // Determinism with range noise.
  cfg.lidar_range_std = 0.02;
  cfg.seed = 5;
  auto r1 = render_lidar(circle, world, 4.0, cfg);
  auto r2 = render_lidar(circle, world, 4.0, cfg);
  REQUIRE(r1.points.size() == r2.points.size());
  for (size_t i = 0; i < r1.points.size(); ++i)
    CHECK((r1.points[i].p - r2.points[i].p).norm() == 0.0);
}

TEST_CASE("radar rendering: ranges, doppler distortion and recovery") {
  World world = make_box_world(60.0, 4.0, 16, 25.0);
  SimConfig cfg;

  GroundTruthTrajectory stat(MotionProfile::stationary);
  auto scan = render_radar(stat, world, 0.0, cfg);
  CfarConfig cc;
  auto det = gocfar_detect(scan, cc);
  REQUIRE(det.size() >= 8);
  auto pts = polar_to_cartesian(det, scan);
  for (const auto& pt : pts) {
    double best = 1e9;
    for (const auto& lm : world.landmarks)
      best = std::min(best, std::abs(pt.p.norm() - lm.norm()));
    CHECK(best <= 0.5 * cfg.radar_range_resolution + 1e-9);
  }

  // Moving platform: Doppler correction restores true ranges.
  GroundTruthTrajectory circle(MotionProfile::smooth_drive);
  Extrinsics ext;
  ext.t_vs = cfg.t_vs;
  ext.beta = cfg.beta;
  auto mscan = render_radar(circle, world, 10.0, cfg);
  auto mdet = gocfar_detect(mscan, cc);
  REQUIRE(mdet.size() >= 8);
  auto mpts = polar_to_cartesian(mdet, mscan);
  int checked = 0;
  for (const auto& pt : mpts) {
    Vec3 q = pt.p;
    Vec3 corrected =
        q + doppler_correction(q, circle.velocity(pt.time), ext);
    // Compare against the true range of the nearest landmark in the sensor
    // frame at that instant.
    Pose t_si = ext.t_vs.inverse() * circle.pose(pt.time);
    double best = 1e9;
    for (const auto& lm : world.landmarks) {
      Vec3 rel = t_si * lm;
      rel.z() = 0.0;
      best = std::min(best, std::abs(corrected.norm() - rel.norm()));
    }
    CHECK(best <= 0.5 * cfg.radar_range_resolution + 1e-6);
    ++checked;
  }
  CHECK(checked >= 8);
}
