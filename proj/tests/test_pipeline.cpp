#include <doctest.h>

#include <cmath>
#include <fstream>

#include <Eigen/Dense>

#include "ctodom/pipeline.hpp"
#include "ctodom/sim.hpp"

using namespace ctodom;

namespace {

PipelineConfig sim_config(PipelineMode mode) {
  PipelineConfig pc;
  pc.mode = mode;
  pc.map.voxel_size = 2.0;
  pc.max_corr_dist = 2.0;
  return pc;
}

struct DriftStats {
  double final_err = 0.0;
  double path = 0.0;
  double max_err = 0.0;
};

// Aligns the first estimate to ground truth and accumulates translation
// error of the mid-scan poses.
DriftStats run_lidar(OdometryPipeline& pipe, const GroundTruthTrajectory& traj,
                     const World& world, const SimConfig& sc, int frames,
                     const std::vector<ImuSample>& imu = {}) {
  DriftStats st;
  Pose g0;
  bool have_g0 = false;
  Vec3 prev_gt = Vec3::Zero();
  for (int i = 0; i < frames; ++i) {
    const auto frame = render_lidar(traj, world, i / sc.lidar_rate, sc);
    const auto res = pipe.process_lidar(frame, imu);
    const Pose gt_wv = traj.pose(res.mid_time).inverse();
    if (!have_g0) {
      g0 = gt_wv * res.t_wv_mid.inverse();
      have_g0 = true;
      prev_gt = gt_wv.r;
    }
    st.path += (gt_wv.r - prev_gt).norm();
    prev_gt = gt_wv.r;
    st.final_err = ((g0 * res.t_wv_mid).r - gt_wv.r).norm();
    st.max_err = std::max(st.max_err, st.final_err);
  }
  return st;
}

}  // namespace

TEST_CASE("pipeline: stationary scene stays put") {
  const World world = make_box_world();
  SimConfig sc;
  GroundTruthTrajectory traj(MotionProfile::stationary);
  OdometryPipeline pipe(sim_config(PipelineMode::lo));
  const auto st = run_lidar(pipe, traj, world, sc, 20);
  CHECK(st.max_err < 1e-3);
  for (const auto& r : pipe.results()) {
    CHECK(!r.degenerate);
    CHECK(!r.solver_failed);
  }
}

TEST_CASE("pipeline: lidar odometry tracks a noiseless drive") {
  const World world = make_box_world();
  SimConfig sc;
  GroundTruthTrajectory traj(MotionProfile::smooth_drive);
  OdometryPipeline pipe(sim_config(PipelineMode::lo));
  const auto st = run_lidar(pipe, traj, world, sc, 60);
  // The startup transient (unknown initial velocity) leaves a bounded
  // offset; the estimate must not drift beyond it.
  CHECK(st.path > 25.0);
  CHECK(st.final_err < 1.0);
}

TEST_CASE("pipeline: lidar-inertial on a noiseless drive") {
  const World world = make_box_world();
  SimConfig sc;
  GroundTruthTrajectory traj(MotionProfile::smooth_drive);
  const auto imu = sample_imu(traj, sc);
  OdometryPipeline pipe(sim_config(PipelineMode::lio));
  const auto st = run_lidar(pipe, traj, world, sc, 60, imu);
  CHECK(st.final_err < 1.0);
  for (const auto& r : pipe.results()) CHECK(!r.solver_failed);
}

TEST_CASE("pipeline: empty scene flags degenerate frames") {
  World world;  // no planes: the lidar returns nothing
  SimConfig sc;
  GroundTruthTrajectory traj(MotionProfile::smooth_drive);
  OdometryPipeline pipe(sim_config(PipelineMode::lo));
  for (int i = 0; i < 3; ++i) {
    auto frame = render_lidar(traj, world, i / sc.lidar_rate, sc);
    frame.t_start = i / sc.lidar_rate;
    frame.t_end = frame.t_start + 0.1;
    const auto res = pipe.process_lidar(frame);
    if (i > 0) CHECK(res.degenerate);
  }
  // Prior extrapolation still produces finite poses.
  CHECK(pipe.results().back().t_wv_mid.r.allFinite());
}

TEST_CASE("pipeline: imu dropout falls back to the motion prior") {
  const World world = make_box_world();
  SimConfig sc;
  GroundTruthTrajectory traj(MotionProfile::smooth_drive);
  OdometryPipeline pipe(sim_config(PipelineMode::lio));
  // Empty IMU stream in an inertial mode: warn and continue.
  const auto st = run_lidar(pipe, traj, world, sc, 10);
  CHECK(st.final_err < 1.0);
  for (const auto& r : pipe.results()) CHECK(!r.solver_failed);
}

TEST_CASE("pipeline: cv baseline tracks a noiseless drive") {
  const World world = make_box_world();
  SimConfig sc;
  GroundTruthTrajectory traj(MotionProfile::smooth_drive);
  OdometryPipeline pipe(sim_config(PipelineMode::cv_baseline));
  const auto st = run_lidar(pipe, traj, world, sc, 60);
  CHECK(st.path > 25.0);
  CHECK(st.final_err < 2.0);
}

TEST_CASE("pipeline: radar odometry on landmarks") {
  const World world = make_box_world();
  SimConfig sc;
  sc.radar_azimuths = 400;
  GroundTruthTrajectory traj(MotionProfile::smooth_drive);
  PipelineConfig pc = sim_config(PipelineMode::ro);
  pc.ext.beta = sc.beta;
  pc.init_velocity = traj.velocity(0.0);
  OdometryPipeline pipe(pc);
  Pose g0;
  bool have_g0 = false;
  double err = 0.0;
  const int frames = 20;
  for (int i = 0; i < frames; ++i) {
    const auto scan = render_radar(traj, world, i * sc.radar_scan_period, sc);
    const auto res = pipe.process_radar(scan);
    const Pose gt_wv = traj.pose(res.mid_time).inverse();
    if (!have_g0) {
      g0 = gt_wv * res.t_wv_mid.inverse();
      have_g0 = true;
    }
    err = ((g0 * res.t_wv_mid).r - gt_wv.r).norm();
  }
  CHECK(err < 1.0);
}

TEST_CASE("pipeline: covariance query is positive definite") {
  const World world = make_box_world();
  SimConfig sc;
  GroundTruthTrajectory traj(MotionProfile::smooth_drive);
  OdometryPipeline pipe(sim_config(PipelineMode::lo));
  run_lidar(pipe, traj, world, sc, 5);
  const auto& knots = pipe.window().knots;
  const double t_mid =
      0.5 * (knots.front().time + knots.back().time);
  const Mat12 cov = pipe.covariance_at(t_mid);
  CHECK((cov - cov.transpose()).norm() < 1e-9);
  Eigen::SelfAdjointEigenSolver<Mat12> es(cov);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("pipeline: diagnostics csv") {
  const World world = make_box_world();
  SimConfig sc;
  GroundTruthTrajectory traj(MotionProfile::stationary);
  OdometryPipeline pipe(sim_config(PipelineMode::lo));
  run_lidar(pipe, traj, world, sc, 3);
  const std::string path = "/tmp/ctodom_test_diag.csv";
  write_diagnostics_csv(path, pipe.results());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.find("wall_time_ms") != std::string::npos);
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 3);
  std::remove(path.c_str());
}
