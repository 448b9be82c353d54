#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ctodom/liegroup.hpp"

namespace ctodom {

// Trajectory files store world-from-vehicle poses (the inverse of the
// estimator's map-to-vehicle state).
struct StampedPose {
  double time = 0.0;
  Pose t_wv;
};

using Trajectory = std::vector<StampedPose>;

enum class RteAggregation { overall, per_length };

struct RteResult {
  double trans_percent = 0.0;
  double rot_deg_per_100m = 0.0;
  int subsequences = 0;
};

// Nearest-timestamp association within max_dt.
std::vector<std::pair<size_t, size_t>> associate(const Trajectory& est,
                                                 const Trajectory& gt,
                                                 double max_dt = 0.01);

// Average drift over all subsequences of gt path length {100, ..., 800} m.
RteResult kitti_rte(const Trajectory& est, const Trajectory& gt,
                    RteAggregation agg = RteAggregation::overall);

// RMSE of positions after rigid Umeyama alignment (no scale).
double ate_umeyama(const Trajectory& est, const Trajectory& gt,
                   double max_dt = 0.01);

// xi = ln(That_{k,k-1} T_{k,k-1}^-1)^vee with T_{k,k-1} built from the
// state poses (inverses of the stored world-from-vehicle poses).
Vec6 relative_error(const Pose& est_k_wv, const Pose& est_km1_wv,
                    const Pose& gt_k_wv, const Pose& gt_km1_wv);

// Sigma = P_k + Ad(T_rel) P_km1 Ad(T_rel)^T.
Mat6 compound_covariance(const Mat6& p_k, const Mat6& p_km1,
                         const Pose& t_rel);

// Dimension-normalized NEES averaged over samples.
double nees(const std::vector<Eigen::VectorXd>& errors,
            const std::vector<Eigen::MatrixXd>& covariances);

// Keeps x, y, yaw; zeroes z, roll, pitch.
Trajectory project_se2(const Trajectory& traj);

void write_metrics_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, double>>& rows);

// Per-associated-pose translational / rotational error over time after
// Umeyama alignment.
void write_error_vs_time_csv(const std::string& path, const Trajectory& est,
                             const Trajectory& gt, double max_dt = 0.01);

}  // namespace ctodom
