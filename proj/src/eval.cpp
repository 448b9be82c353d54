#include "ctodom/eval.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ctodom {

std::vector<std::pair<size_t, size_t>> associate(const Trajectory& est,
                                                 const Trajectory& gt,
                                                 double max_dt) {
  std::vector<std::pair<size_t, size_t>> out;
  size_t j = 0;
  for (size_t i = 0; i < est.size(); ++i) {
    while (j + 1 < gt.size() &&
           std::abs(gt[j + 1].time - est[i].time) <=
               std::abs(gt[j].time - est[i].time)) {
      ++j;
    }
    if (j < gt.size() && std::abs(gt[j].time - est[i].time) <= max_dt) {
      out.emplace_back(i, j);
    }
  }
  return out;
}

namespace {

std::vector<double> cumulative_path(const Trajectory& gt,
                                    const std::vector<size_t>& idx) {
  std::vector<double> dist(idx.size(), 0.0);
  for (size_t i = 1; i < idx.size(); ++i) {
    dist[i] = dist[i - 1] +
              (gt[idx[i]].t_wv.r - gt[idx[i - 1]].t_wv.r).norm();
  }
  return dist;
}

double rotation_angle(const Mat3& C) {
  const double c = std::clamp(0.5 * (C.trace() - 1.0), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace

RteResult kitti_rte(const Trajectory& est, const Trajectory& gt,
                    RteAggregation agg) {
  RteResult res;
  auto pairs = associate(est, gt);
  if (pairs.size() < 2) return res;
  std::vector<size_t> ei(pairs.size()), gi(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    ei[i] = pairs[i].first;
    gi[i] = pairs[i].second;
  }
  const std::vector<double> dist = cumulative_path(gt, gi);

  const double lengths[] = {100, 200, 300, 400, 500, 600, 700, 800};
  double sum_t[8] = {0}, sum_r[8] = {0};
  int count[8] = {0};
  for (size_t first = 0; first < pairs.size(); ++first) {
    size_t last = first;
    for (int li = 0; li < 8; ++li) {
      const double len = lengths[li];
      while (last < pairs.size() && dist[last] - dist[first] < len) ++last;
      if (last >= pairs.size()) break;
      const Pose rel_gt =
          gt[gi[first]].t_wv.inverse() * gt[gi[last]].t_wv;
      const Pose rel_est =
          est[ei[first]].t_wv.inverse() * est[ei[last]].t_wv;
      const Pose err = rel_gt.inverse() * rel_est;
      sum_t[li] += err.r.norm() / len;
      sum_r[li] += rotation_angle(err.C) / len;
      ++count[li];
    }
  }

  if (agg == RteAggregation::overall) {
    double st = 0, sr = 0;
    int n = 0;
    for (int li = 0; li < 8; ++li) {
      st += sum_t[li];
      sr += sum_r[li];
      n += count[li];
    }
    if (n == 0) return res;
    res.trans_percent = 100.0 * st / n;
    res.rot_deg_per_100m = (sr / n) * (180.0 / M_PI) * 100.0;
    res.subsequences = n;
  } else {
    double st = 0, sr = 0;
    int nl = 0;
    for (int li = 0; li < 8; ++li) {
      if (count[li] == 0) continue;
      st += sum_t[li] / count[li];
      sr += sum_r[li] / count[li];
      res.subsequences += count[li];
      ++nl;
    }
    if (nl == 0) return res;
    res.trans_percent = 100.0 * st / nl;
    res.rot_deg_per_100m = (sr / nl) * (180.0 / M_PI) * 100.0;
  }
  return res;
}

double ate_umeyama(const Trajectory& est, const Trajectory& gt,
                   double max_dt) {
  auto pairs = associate(est, gt, max_dt);
  if (pairs.size() < 3) throw std::invalid_argument("too few associations");
  Eigen::Matrix3Xd src(3, pairs.size()), dst(3, pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    src.col(i) = est[pairs[i].first].t_wv.r;
    dst.col(i) = gt[pairs[i].second].t_wv.r;
  }
  const Mat4 A = Eigen::umeyama(src, dst, false);
  double se = 0.0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    Vec3 aligned = A.topLeftCorner<3, 3>() * src.col(i) + A.topRightCorner<3, 1>();
    se += (aligned - dst.col(i)).squaredNorm();
  }
  return std::sqrt(se / pairs.size());
}

Vec6 relative_error(const Pose& est_k_wv, const Pose& est_km1_wv,
                    const Pose& gt_k_wv, const Pose& gt_km1_wv) {
  const Pose rel_est = est_k_wv.inverse() * est_km1_wv;
  const Pose rel_gt = gt_k_wv.inverse() * gt_km1_wv;
  return se3_log(rel_est * rel_gt.inverse());
}

Mat6 compound_covariance(const Mat6& p_k, const Mat6& p_km1,
                         const Pose& t_rel) {
  const Mat6 ad = t_rel.adjoint();
  return p_k + ad * p_km1 * ad.transpose();
}

double nees(const std::vector<Eigen::VectorXd>& errors,
            const std::vector<Eigen::MatrixXd>& covariances) {
  if (errors.size() != covariances.size() || errors.empty()) {
    throw std::invalid_argument("errors/covariances size mismatch");
  }
  double sum = 0.0;
  for (size_t i = 0; i < errors.size(); ++i) {
    const auto& e = errors[i];
    sum += e.dot(covariances[i].ldlt().solve(e)) / e.size();
  }
  return sum / errors.size();
}

Trajectory project_se2(const Trajectory& traj) {
  Trajectory out = traj;
  for (auto& sp : out) {
    const Mat3& C = sp.t_wv.C;
    const double yaw = std::atan2(C(1, 0), C(0, 0));
    Mat3 Cz = Mat3::Identity();
    Cz(0, 0) = std::cos(yaw);
    Cz(0, 1) = -std::sin(yaw);
    Cz(1, 0) = std::sin(yaw);
    Cz(1, 1) = std::cos(yaw);
    sp.t_wv.C = Cz;
    sp.t_wv.r.z() = 0.0;
  }
  return out;
}

void write_metrics_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, double>>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "metric,value\n";
  for (const auto& [name, value] : rows) f << name << "," << value << "\n";
}

void write_error_vs_time_csv(const std::string& path, const Trajectory& est,
                             const Trajectory& gt, double max_dt) {
  auto pairs = associate(est, gt, max_dt);
  if (pairs.size() < 3) throw std::invalid_argument("too few associations");
  Eigen::Matrix3Xd src(3, pairs.size()), dst(3, pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    src.col(i) = est[pairs[i].first].t_wv.r;
    dst.col(i) = gt[pairs[i].second].t_wv.r;
  }
  const Mat4 A = Eigen::umeyama(src, dst, false);
  const Mat3 R = A.topLeftCorner<3, 3>();
  const Vec3 t = A.topRightCorner<3, 1>();

  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "time,translation_error_m,rotation_error_rad\n";
  for (const auto& [i, j] : pairs) {
    const Vec3 aligned = R * est[i].t_wv.r + t;
    const double terr = (aligned - gt[j].t_wv.r).norm();
    const double rerr =
        rotation_angle((R * est[i].t_wv.C).transpose() * gt[j].t_wv.C);
    f << est[i].time << "," << terr << "," << rerr << "\n";
  }
}

}  // namespace ctodom
