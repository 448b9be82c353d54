// Command-line driver: odometry over a dataset directory, synthetic dataset
// generation, and trajectory evaluation.
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctodom/eval.hpp"
#include "ctodom/io.hpp"
#include "ctodom/pipeline.hpp"
#include "ctodom/sim.hpp"

namespace fs = std::filesystem;
using namespace ctodom;

namespace {

PipelineMode parse_mode(const std::string& mode) {
  if (mode == "lo") return PipelineMode::lo;
  if (mode == "lio") return PipelineMode::lio;
  if (mode == "ro") return PipelineMode::ro;
  if (mode == "rio") return PipelineMode::rio;
  if (mode == "cv-baseline") return PipelineMode::cv_baseline;
  throw std::invalid_argument("unknown mode: " + mode);
}

PipelineConfig pipeline_config(const Config& c, PipelineMode mode,
                               uint64_t seed) {
  PipelineConfig pc;
  pc.mode = mode;
  pc.seed = seed;
  pc.solver.inner_max = c.get_int("solver.inner_max", pc.solver.inner_max);
  pc.solver.outer_max = c.get_int("solver.outer_max", pc.solver.outer_max);
  pc.solver.t_inner = c.get_double("solver.t_inner", pc.solver.t_inner);
  pc.solver.t_outer = c.get_double("solver.t_outer", pc.solver.t_outer);
  pc.solver.dj_rel = c.get_double("solver.dj_rel", pc.solver.dj_rel);
  pc.solver.window_frames =
      c.get_int("solver.window_frames", pc.solver.window_frames);
  pc.solver.extra_knots_per_frame = c.get_int(
      "solver.extra_knots_per_frame", pc.solver.extra_knots_per_frame);
  for (int i = 0; i < 6; ++i) {
    pc.prior.q_diag(i) = c.get_double("prior.qc_" + std::to_string(i),
                                      pc.prior.q_diag(i));
    pc.prior.qb_diag(i) = c.get_double("prior.qb_" + std::to_string(i),
                                       pc.prior.qb_diag(i));
  }
  pc.map.voxel_size = c.get_double("map.voxel_size", pc.map.voxel_size);
  pc.map.max_points_per_voxel =
      c.get_int("map.max_points_per_voxel", pc.map.max_points_per_voxel);
  pc.map.min_point_distance =
      c.get_double("map.min_point_distance", pc.map.min_point_distance);
  pc.map.expiry_frames = c.get_int("map.expiry_frames", pc.map.expiry_frames);
  pc.map.keyframe_distance =
      c.get_double("map.keyframe_distance", pc.map.keyframe_distance);
  pc.downsample_voxel =
      c.get_double("frontend.downsample_voxel", pc.downsample_voxel);
  pc.timestamp_freq =
      c.get_double("frontend.timestamp_freq", pc.timestamp_freq);
  pc.min_range = c.get_double("frontend.min_range", pc.min_range);
  pc.max_range = c.get_double("frontend.max_range", pc.max_range);
  pc.cfar.train_cells = c.get_int("cfar.train_cells", pc.cfar.train_cells);
  pc.cfar.guard_cells = c.get_int("cfar.guard_cells", pc.cfar.guard_cells);
  pc.cfar.threshold_factor =
      c.get_double("cfar.threshold_factor", pc.cfar.threshold_factor);
  pc.cfar.noise_floor = c.get_double("cfar.noise_floor", pc.cfar.noise_floor);
  pc.num_neighbors = c.get_int("icp.num_neighbors", pc.num_neighbors);
  pc.max_corr_dist = c.get_double("icp.max_corr_dist", pc.max_corr_dist);
  pc.min_correspondences =
      c.get_int("icp.min_correspondences", pc.min_correspondences);
  pc.p2plane_var = c.get_double("icp.p2plane_var", pc.p2plane_var);
  pc.p2p_var = c.get_double("icp.p2p_var", pc.p2p_var);
  const std::string loss = c.get_string("icp.loss", "cauchy");
  if (loss == "none") pc.loss.kind = LossKind::none;
  else if (loss == "cauchy") pc.loss.kind = LossKind::cauchy;
  else if (loss == "huber") pc.loss.kind = LossKind::huber;
  else throw std::invalid_argument("unknown icp.loss: " + loss);
  pc.loss.scale = c.get_double("icp.loss_scale", pc.loss.scale);
  pc.imu_noise.r_omega =
      c.get_double("imu.r_omega", 1e-3) * Mat3::Identity();
  pc.imu_noise.r_accel =
      c.get_double("imu.r_accel", 1e-2) * Mat3::Identity();
  return pc;
}

int run_odometry(const std::string& mode_str, const Config& conf,
                 const std::string& data, const std::string& out,
                 uint64_t seed, int max_frames, bool diag) {
  const PipelineMode mode = parse_mode(mode_str);
  const bool needs_imu =
      mode == PipelineMode::lio || mode == PipelineMode::rio;

  const DatasetIndex idx = scan_dataset(data);
  if (idx.frame_paths.empty()) {
    std::fprintf(stderr, "error: no_frames dir=%s\n", data.c_str());
    return 2;
  }
  if (needs_imu && idx.imu_path.empty()) {
    std::fprintf(stderr, "error: imu_required mode=%s dir=%s\n",
                 mode_str.c_str(), data.c_str());
    return 2;
  }

  PipelineConfig pc = pipeline_config(conf, mode, seed);
  if (!idx.calib_path.empty()) {
    const Calib calib = read_calib(idx.calib_path);
    pc.ext.t_vs = calib.t_vs;
    pc.ext.beta = calib.beta;
  }
  std::vector<ImuSample> imu;
  if (!idx.imu_path.empty()) imu = read_imu_csv(idx.imu_path);

  OdometryPipeline pipe(pc);
  Trajectory traj;
  size_t n = idx.frame_paths.size();
  if (max_frames > 0) n = std::min(n, static_cast<size_t>(max_frames));
  for (size_t i = 0; i < n; ++i) {
    const std::string& path = idx.frame_paths[i];
    FrameResult res;
    if (path.ends_with(".rad")) {
      res = pipe.process_radar(read_polar_scan(path), imu);
    } else if (path.ends_with(".csv")) {
      res = pipe.process_lidar(read_lidar_csv(path), imu);
    } else {
      res = pipe.process_lidar(read_lidar_bin(path), imu);
    }
    if (res.solver_failed) {
      std::fprintf(stderr, "error: solver_failed frame=%zu\n", i);
      return 3;
    }
    traj.push_back({res.mid_time, res.t_wv_mid});
  }

  fs::create_directories(out);
  write_trajectory_tum((fs::path(out) / "trajectory.tum").string(), traj);
  write_trajectory_kitti((fs::path(out) / "trajectory.kitti").string(), traj);
  if (diag)
    write_diagnostics_csv((fs::path(out) / "diagnostics.csv").string(),
                          pipe.results());
  std::printf("processed %zu frames\n", n);
  return 0;
}

int run_simulate(const Config& conf, const std::string& out, uint64_t seed,
                 int max_frames) {
  SimConfig sc;
  sc.seed = seed;
  sc.duration = conf.get_double("sim.duration", sc.duration);
  sc.imu_rate = conf.get_double("sim.imu_rate", sc.imu_rate);
  sc.lidar_rate = conf.get_double("sim.lidar_rate", sc.lidar_rate);
  sc.lidar_beams = conf.get_int("sim.lidar_beams", sc.lidar_beams);
  sc.lidar_azimuths = conf.get_int("sim.lidar_azimuths", sc.lidar_azimuths);
  sc.lidar_range_std =
      conf.get_double("sim.lidar_range_std", sc.lidar_range_std);
  sc.gyro_noise_std =
      conf.get_double("sim.gyro_noise_std", sc.gyro_noise_std);
  sc.accel_noise_std =
      conf.get_double("sim.accel_noise_std", sc.accel_noise_std);
  sc.beta = conf.get_double("sim.beta", sc.beta);
  const std::string profile = conf.get_string("sim.profile", "smooth_drive");
  if (profile == "stationary") sc.profile = MotionProfile::stationary;
  else if (profile == "smooth_drive") sc.profile = MotionProfile::smooth_drive;
  else if (profile == "fast_drive") sc.profile = MotionProfile::fast_drive;
  else if (profile == "spin_aggressive")
    sc.profile = MotionProfile::spin_aggressive;
  else throw std::invalid_argument("unknown sim.profile: " + profile);
  const bool radar = conf.get_bool("sim.radar", false);

  const World world = make_box_world();
  GroundTruthTrajectory traj(sc.profile);

  fs::create_directories(out);
  const double period =
      radar ? sc.radar_scan_period : 1.0 / sc.lidar_rate;
  int n = static_cast<int>(sc.duration / period);
  if (max_frames > 0) n = std::min(n, max_frames);
  Trajectory gt;
  for (int i = 0; i < n; ++i) {
    const double t = i * period;
    if (radar) {
      write_polar_scan(
          (fs::path(out) / (std::to_string(i) + ".rad")).string(),
          render_radar(traj, world, t, sc));
    } else {
      write_lidar_bin(
          (fs::path(out) / (std::to_string(i) + ".bin")).string(),
          render_lidar(traj, world, t, sc));
    }
    const double t_mid = t + 0.5 * period;
    gt.push_back({t_mid, traj.pose(t_mid).inverse()});
  }
  SimConfig imu_cfg = sc;
  imu_cfg.duration = n * period;
  write_imu_csv((fs::path(out) / "imu.csv").string(),
                sample_imu(traj, imu_cfg));
  Calib calib;
  calib.t_vs = sc.t_vs;
  calib.beta = sc.beta;
  write_calib((fs::path(out) / "calib.txt").string(), calib);
  write_trajectory_tum((fs::path(out) / "gt.tum").string(), gt);
  std::printf("wrote %d frames to %s\n", n, out.c_str());
  return 0;
}

int run_evaluate(const std::string& data, const std::string& out) {
  const fs::path est_path = fs::path(out) / "trajectory.tum";
  fs::path gt_path = fs::path(data) / "gt.tum";
  if (!fs::exists(gt_path)) gt_path = data;  // allow a direct file path
  if (!fs::exists(est_path)) {
    std::fprintf(stderr, "error: missing_estimate path=%s\n",
                 est_path.string().c_str());
    return 2;
  }
  if (!fs::exists(gt_path)) {
    std::fprintf(stderr, "error: missing_ground_truth path=%s\n",
                 gt_path.string().c_str());
    return 2;
  }
  const Trajectory est = read_trajectory_tum(est_path.string());
  const Trajectory gt = read_trajectory_tum(gt_path.string());
  const RteResult rte = kitti_rte(est, gt);
  const double ate = ate_umeyama(est, gt);
  std::vector<std::pair<std::string, double>> rows = {
      {"rte_trans_percent", rte.trans_percent},
      {"rte_rot_deg_per_100m", rte.rot_deg_per_100m},
      {"rte_subsequences", static_cast<double>(rte.subsequences)},
      {"ate_rmse_m", ate},
  };
  write_metrics_csv((fs::path(out) / "metrics.csv").string(), rows);
  write_error_vs_time_csv((fs::path(out) / "error_vs_time.csv").string(),
                          est, gt);
  std::printf("rte_trans_percent=%.4f ate_rmse_m=%.4f\n", rte.trans_percent,
              ate);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-time lidar/radar-inertial odometry"};
  std::string mode, config_path, data, out = "ctodom_out";
  uint64_t seed = 0;
  int frames = 0;
  bool diag = false;
  app.add_option("--mode", mode,
                 "lo|lio|ro|rio|cv-baseline|simulate|evaluate")
      ->required();
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--data", data, "dataset directory");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--frames", frames, "truncate to the first N frames");
  app.add_flag("--diag", diag, "write per-frame diagnostics CSV");
  CLI11_PARSE(app, argc, argv);

  try {
    Config conf;
    if (!config_path.empty()) conf = Config::from_file(config_path);
    if (mode == "simulate") return run_simulate(conf, out, seed, frames);
    if (mode == "evaluate") return run_evaluate(data, out);
    return run_odometry(mode, conf, data, out, seed, frames, diag);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
