#include "ctodom/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <unordered_map>

namespace ctodom {

namespace {

double pose_dist(const Pose& a, const Pose& b) {
  const Vec6 xi = se3_log(a * b.inverse());
  return std::max(xi.head<3>().norm(), 0.1 * xi.tail<3>().norm());
}

double bundle_min_time(const OdometryPipeline::MeasBundle&);

}  // namespace

OdometryPipeline::OdometryPipeline(const PipelineConfig& cfg)
    : cfg_(cfg), map_(cfg.map) {}

std::vector<QueryPoint> OdometryPipeline::preprocess_lidar(
    const LidarFrame& frame) const {
  LidarFrame f = crop_lidar(frame, cfg_.min_range, cfg_.max_range);
  f = downsample_lidar(f, cfg_.downsample_voxel,
                       cfg_.seed + static_cast<uint64_t>(frame_idx_));
  if (cfg_.timestamp_freq > 0.0) f = bin_timestamps(f, cfg_.timestamp_freq);
  std::vector<QueryPoint> points;
  points.reserve(f.points.size());
  for (const auto& pt : f.points) {
    QueryPoint qp;
    qp.q = pt.p;
    qp.time = pt.time;
    points.push_back(qp);
  }
  return points;
}

FrameResult OdometryPipeline::process_lidar(const LidarFrame& frame,
                                            const std::vector<ImuSample>& imu) {
  auto points = preprocess_lidar(frame);
  double t_end = frame.t_end;
  for (const auto& qp : points) t_end = std::max(t_end, qp.time);
  if (cfg_.mode == PipelineMode::cv_baseline)
    return cv_step(points, frame.t_start, t_end);
  return process_points(std::move(points), frame.t_start, t_end, imu, false);
}

FrameResult OdometryPipeline::process_radar(const PolarScan& scan,
                                            const std::vector<ImuSample>& imu) {
  const auto detections = gocfar_detect(scan, cfg_.cfar);
  const auto radar_points = polar_to_cartesian(detections, scan);
  std::vector<QueryPoint> points;
  points.reserve(radar_points.size());
  for (const auto& rp : radar_points) {
    const double r = rp.p.norm();
    if (r < cfg_.min_range || r > cfg_.max_range) continue;
    QueryPoint qp;
    qp.q = rp.p;
    qp.time = rp.time;
    points.push_back(qp);
  }
  const double t_start = scan.azimuth_times.front();
  const double t_end = scan.azimuth_times.back();
  if (cfg_.mode == PipelineMode::cv_baseline)
    return cv_step(points, t_start, t_end);
  return process_points(std::move(points), t_start, t_end, imu, true);
}

bool OdometryPipeline::match_point(const QueryPoint& qp,
                                   const Pose& pose_interp, bool radar,
                                   Correspondence* corr) const {
  const Pose t_iv = pose_interp.inverse();
  const Vec3 m = t_iv * (cfg_.ext.t_vs * qp.q);
  const auto neighbors =
      map_.nearest_neighbors(m, cfg_.num_neighbors, cfg_.max_corr_dist);
  if (neighbors.empty()) return false;
  if (radar) {
    // Centroid of the neighborhood: matching the single nearest map point
    // just echoes our own past estimate and lets drift freewheel.
    Vec3 c = Vec3::Zero();
    for (const auto& nb : neighbors) c += nb;
    corr->p = c / static_cast<double>(neighbors.size());
    corr->n = Vec3::UnitZ();
    corr->alpha = 1.0;
    return true;
  }
  if (neighbors.size() < 5) return false;
  const Vec3 sensor_origin = t_iv * cfg_.ext.t_vs.r;
  const auto est = estimate_normal(neighbors, sensor_origin);
  if (!est.valid) return false;
  corr->p = neighbors.front();
  corr->n = est.n;
  corr->alpha = est.alpha;
  return true;
}

std::vector<LinearizedFactor> OdometryPipeline::prior_factors() const {
  std::vector<LinearizedFactor> factors;
  const int n = static_cast<int>(window_.knots.size());
  for (int k = 0; k + 1 < n; ++k) {
    factors.push_back(linearize_motion_prior(window_, k, cfg_.prior));
    factors.push_back(linearize_bias_prior(window_, k, cfg_.prior.qb_diag));
  }
  return factors;
}

std::vector<LinearizedFactor> OdometryPipeline::bundle_factors(
    const MeasBundle& b, InterpCache* cache) const {
  std::vector<LinearizedFactor> factors;
  const bool mode_2d = b.radar;
  for (const auto& [qp, corr] : b.matches) {
    if (b.radar) {
      factors.push_back(linearize_p2p_radar(window_, qp, corr, cfg_.ext,
                                            cfg_.prior, cfg_.p2p_var,
                                            cfg_.loss, cache));
    } else {
      factors.push_back(linearize_p2plane(window_, qp, corr, cfg_.ext,
                                          cfg_.prior, cfg_.p2plane_var,
                                          cfg_.loss, cache));
    }
  }
  if (!b.imu.empty()) {
    for (const auto& s : b.imu)
      factors.push_back(linearize_gyro(window_, s, cfg_.prior,
                                       cfg_.imu_noise.r_omega, cache));
    // One preintegrated velocity factor per inter-knot interval.
    std::vector<std::vector<ImuSample>> groups(window_.knots.size());
    for (const auto& s : b.imu) {
      const int k = bracket_interval(window_, s.time);
      if (s.time > window_.knots[k].time) groups[k].push_back(s);
    }
    for (size_t k = 0; k < groups.size(); ++k) {
      if (groups[k].empty()) continue;
      factors.push_back(linearize_preint(
          window_, static_cast<int>(k), groups[k],
          cfg_.gravity.gravity_in_inertial(), cfg_.prior,
          cfg_.imu_noise.r_accel, mode_2d, cache));
    }
  }
  return factors;
}

void OdometryPipeline::bootstrap(const std::vector<QueryPoint>& points,
                                 double t_start, double t_end) {
  TrajectoryKnot k0, k1;
  k0.time = t_start;
  k1.time = t_end;
  k0.velocity = cfg_.init_velocity;
  k1.velocity = cfg_.init_velocity;
  k1.pose = se3_exp(((t_end - t_start) * cfg_.init_velocity).eval()) * k0.pose;
  window_.knots = {k0, k1};
  knots_per_frame_ = {2};

  MargPrior prior;
  Eigen::Matrix<double, kKnotDim, 1> info;
  info.head<6>().setConstant(cfg_.pin_pose_info);
  info.segment<6>(6).setConstant(cfg_.pin_vel_info);
  info.tail<6>().setConstant(cfg_.pin_bias_info);
  prior.a = info.asDiagonal();
  prior.c = Eigen::VectorXd::Zero(kKnotDim);
  prior.lin = {k0};
  window_.prior = std::move(prior);

  Eigen::VectorXd c;
  build_normal_equations(window_, prior_factors(), &last_a_, &c);
  update_map(points, cfg_.mode == PipelineMode::ro ||
                         cfg_.mode == PipelineMode::rio);
}

FrameResult OdometryPipeline::process_points(std::vector<QueryPoint> points,
                                             double t_start, double t_end,
                                             const std::vector<ImuSample>& imu,
                                             bool radar) {
  const auto wall0 = std::chrono::steady_clock::now();
  FrameResult res;
  res.mid_time = 0.5 * (t_start + t_end);

  const bool use_imu =
      cfg_.mode == PipelineMode::lio || cfg_.mode == PipelineMode::rio;

  if (window_.knots.empty()) {
    bootstrap(points, t_start, t_end);
    res.t_wv_mid = Pose();
    res.wall_time_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - wall0)
            .count();
    ++frame_idx_;
    results_.push_back(res);
    return res;
  }

  // Slide: the departing frame's knots take every factor that touches them,
  // frozen at the current estimate.
  if (static_cast<int>(knots_per_frame_.size()) >= cfg_.solver.window_frames) {
    const int count = knots_per_frame_.front();
    std::vector<LinearizedFactor> marg_factors;
    for (int k = 0; k < count; ++k) {
      marg_factors.push_back(linearize_motion_prior(window_, k, cfg_.prior));
      marg_factors.push_back(
          linearize_bias_prior(window_, k, cfg_.prior.qb_diag));
    }
    const double t_boundary = window_.knots[count].time;
    while (!bundles_.empty() &&
           bundle_min_time(bundles_.front()) < t_boundary) {
      const auto bf = bundle_factors(bundles_.front());
      marg_factors.insert(marg_factors.end(), bf.begin(), bf.end());
      bundles_.pop_front();
    }
    slide_and_marginalize(window_, marg_factors, count);
    knots_per_frame_.pop_front();
  }

  // New knots by constant-velocity extrapolation.
  const double t_prev = window_.knots.back().time;
  const int m = 1 + std::max(0, cfg_.solver.extra_knots_per_frame);
  for (int i = 1; i <= m; ++i)
    window_.knots.push_back(
        init_knot(window_, t_prev + i * (t_end - t_prev) / m));
  knots_per_frame_.push_back(m);

  MeasBundle bundle;
  bundle.radar = radar;
  if (use_imu) {
    for (const auto& s : imu)
      if (s.time > t_prev && s.time <= t_end) bundle.imu.push_back(s);
    if (bundle.imu.empty())
      std::fprintf(stderr,
                   "frame %lld: IMU dropout, continuing on the motion "
                   "prior\n",
                   static_cast<long long>(frame_idx_));
  }

  double prev_cost = -1.0;
  for (int outer = 0; outer < cfg_.solver.outer_max; ++outer) {
    res.outer_iterations = outer + 1;
    const Pose pose_before = window_.knots.back().pose;

    // Undistort with the current posterior, then re-match.
    bundle.matches.clear();
    std::unordered_map<double, Pose> pose_cache;
    for (const auto& qp : points) {
      auto [it, inserted] = pose_cache.try_emplace(qp.time);
      if (inserted) {
        const int k = bracket_interval(window_, qp.time);
        it->second = interpolate_state(window_.knots[k],
                                       window_.knots[k + 1], qp.time,
                                       cfg_.prior)
                         .pose;
      }
      Correspondence corr;
      if (match_point(qp, it->second, radar, &corr))
        bundle.matches.emplace_back(qp, corr);
    }
    res.correspondences = static_cast<int>(bundle.matches.size());
    if (res.correspondences < cfg_.min_correspondences) {
      res.degenerate = true;
      bundle.matches.clear();
    }

    bool inner_converged = false;
    for (int inner = 0; inner < cfg_.solver.inner_max; ++inner) {
      ++res.inner_iterations;
      std::vector<LinearizedFactor> factors = prior_factors();
      InterpCache cache;
      for (const auto& b : bundles_) {
        const auto bf = bundle_factors(b, &cache);
        factors.insert(factors.end(), bf.begin(), bf.end());
      }
      const auto bf = bundle_factors(bundle, &cache);
      factors.insert(factors.end(), bf.begin(), bf.end());

      Eigen::VectorXd c, dx;
      build_normal_equations(window_, factors, &last_a_, &c);
      res.cost = total_cost(factors);
      if (!gauss_newton_step(last_a_, c, cfg_.solver, &dx)) {
        res.solver_failed = true;
        break;
      }
      update_window(window_, dx);
      if (dx.norm() < cfg_.solver.t_inner) {
        inner_converged = true;
        break;
      }
      if (prev_cost > 0.0 &&
          std::abs(prev_cost - res.cost) <
              cfg_.solver.dj_rel * std::max(prev_cost, 1e-12)) {
        inner_converged = true;
        break;
      }
      prev_cost = res.cost;
    }
    if (res.solver_failed) break;
    if (res.degenerate) break;
    if (pose_dist(window_.knots.back().pose, pose_before) <
            cfg_.solver.t_outer &&
        (inner_converged || res.outer_iterations > 1))
      break;
  }

  if (!res.degenerate && !res.solver_failed) bundles_.push_back(bundle);

  // Final linearization for covariance queries.
  {
    std::vector<LinearizedFactor> factors = prior_factors();
    InterpCache cache;
    for (const auto& b : bundles_) {
      const auto bf = bundle_factors(b, &cache);
      factors.insert(factors.end(), bf.begin(), bf.end());
    }
    Eigen::VectorXd c;
    build_normal_equations(window_, factors, &last_a_, &c);
  }
  res.condition_proxy =
      last_a_.diagonal().maxCoeff() / std::max(last_a_.diagonal().minCoeff(),
                                               1e-300);

  if (!res.solver_failed) update_map(points, radar);

  res.t_wv_mid = pose_at(res.mid_time);
  res.wall_time_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - wall0)
                         .count();
  ++frame_idx_;
  results_.push_back(res);
  return res;
}

FrameResult OdometryPipeline::cv_step(const std::vector<QueryPoint>& points,
                                      double t_start, double t_end) {
  const auto wall0 = std::chrono::steady_clock::now();
  FrameResult res;
  res.mid_time = 0.5 * (t_start + t_end);

  if (frame_idx_ == 0) {
    cv_t_km2_ = Pose();
    cv_t_km1_ = Pose();
    cv_t_km1_time_ = t_end;
    cv_dt_prev_ = 1.0;
    cv_varpi_.setZero();
    update_map(points, false);
    res.t_wv_mid = Pose();
  } else {
    auto match = [&](const Vec3& p_map, Correspondence* corr) {
      const auto neighbors =
          map_.nearest_neighbors(p_map, cfg_.num_neighbors,
                                 cfg_.max_corr_dist);
      if (neighbors.size() < 5) return false;
      const auto est = estimate_normal(neighbors, Vec3::Zero());
      if (!est.valid) return false;
      corr->p = neighbors.front();
      corr->n = est.n;
      corr->alpha = est.alpha;
      return true;
    };
    const auto step = constant_velocity_step(
        cv_t_km2_, cv_t_km1_, cv_dt_prev_, cv_t_km1_time_, t_end, points,
        match, cfg_.ext, cfg_.loss, cfg_.p2plane_var);
    res.inner_iterations = step.iterations;
    res.outer_iterations = 1;
    res.degenerate = !step.converged && step.iterations == 0;
    cv_varpi_ = se3_log(step.t_k * cv_t_km1_.inverse()) / (t_end -
                                                           cv_t_km1_time_);
    cv_t_km2_ = cv_t_km1_;
    cv_dt_prev_ = t_end - cv_t_km1_time_;
    cv_t_km1_ = step.t_k;
    cv_t_km1_time_ = t_end;
    update_map(points, false);
    res.t_wv_mid =
        (se3_exp(((res.mid_time - t_end) * cv_varpi_).eval()) * step.t_k)
            .inverse();
  }
  res.wall_time_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - wall0)
                         .count();
  ++frame_idx_;
  results_.push_back(res);
  return res;
}

void OdometryPipeline::update_map(const std::vector<QueryPoint>& points,
                                  bool radar) {
  (void)radar;
  const Vec3 pos = pose_at(window_.knots.empty()
                               ? cv_t_km1_time_
                               : window_.knots.back().time)
                       .r;
  if (cfg_.map.keyframe_distance > 0.0 && frame_idx_ > 0 &&
      (pos - last_map_update_pos_).norm() < cfg_.map.keyframe_distance)
    return;
  last_map_update_pos_ = pos;

  std::vector<Vec3> map_points;
  map_points.reserve(points.size());
  std::unordered_map<double, Pose> pose_cache;
  for (const auto& qp : points) {
    auto [it, inserted] = pose_cache.try_emplace(qp.time);
    if (inserted)
      it->second = cfg_.mode == PipelineMode::cv_baseline
                       ? se3_exp(((qp.time - cv_t_km1_time_) * cv_varpi_)
                                     .eval()) *
                             cv_t_km1_
                       : [&] {
                           const int k = bracket_interval(window_, qp.time);
                           return interpolate_state(window_.knots[k],
                                                    window_.knots[k + 1],
                                                    qp.time, cfg_.prior)
                               .pose;
                         }();
    map_points.push_back(it->second.inverse() * (cfg_.ext.t_vs * qp.q));
  }
  map_.insert(map_points, frame_idx_);
  map_.expire(frame_idx_);
}

Pose OdometryPipeline::pose_at(double t) const {
  if (cfg_.mode == PipelineMode::cv_baseline)
    return (se3_exp(((t - cv_t_km1_time_) * cv_varpi_).eval()) * cv_t_km1_)
        .inverse();
  if (window_.knots.empty()) return Pose();
  if (window_.knots.size() == 1 || t >= window_.knots.back().time) {
    const auto& last = window_.knots.back();
    return (se3_exp(((t - last.time) * last.velocity).eval()) * last.pose)
        .inverse();
  }
  if (t <= window_.knots.front().time) {
    const auto& first = window_.knots.front();
    return (se3_exp(((t - first.time) * first.velocity).eval()) * first.pose)
        .inverse();
  }
  const int k = bracket_interval(window_, t);
  return interpolate_state(window_.knots[k], window_.knots[k + 1], t,
                           cfg_.prior)
      .pose.inverse();
}

Mat12 OdometryPipeline::covariance_at(double t) const {
  return query_covariance(window_, last_a_, t);
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<FrameResult>& results) {
  std::ofstream out(path);
  out << "time,outer_iterations,inner_iterations,cost,correspondences,"
         "condition_proxy,wall_time_ms\n";
  char buf[256];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof(buf), "%.6f,%d,%d,%.9g,%d,%.6g,%.3f\n",
                  r.mid_time, r.outer_iterations, r.inner_iterations, r.cost,
                  r.correspondences, r.condition_proxy, r.wall_time_ms);
    out << buf;
  }
}

namespace {

double bundle_min_time(const OdometryPipeline::MeasBundle& b) {
  double t = std::numeric_limits<double>::infinity();
  for (const auto& [qp, corr] : b.matches) t = std::min(t, qp.time);
  for (const auto& s : b.imu) t = std::min(t, s.time);
  return t;
}

}  // namespace

}  // namespace ctodom
