#include "ctodom/voxel_map.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ctodom/icp.hpp"

namespace ctodom {

NormalEstimate estimate_normal(const std::vector<Vec3>& neighbors,
                               const Vec3& sensor_origin) {
  NormalEstimate out;
  if (neighbors.size() < 5) return out;
  Vec3 mean = Vec3::Zero();
  for (const auto& p : neighbors) mean += p;
  mean /= static_cast<double>(neighbors.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : neighbors) {
    Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(neighbors.size());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  // Ascending eigenvalues; smallest direction is the normal.
  Vec3 n = eig.eigenvectors().col(0);
  if (n.dot(sensor_origin - mean) < 0.0) n = -n;
  out.n = n;
  Vec3 sigma(eig.eigenvalues()(2), eig.eigenvalues()(1), eig.eigenvalues()(0));
  out.alpha = plane_weight(sigma);
  out.valid = true;
  return out;
}

VoxelKey VoxelMap::key_of(const Vec3& p) const {
  return VoxelKey{static_cast<int32_t>(std::floor(p.x() / cfg_.voxel_size)),
                  static_cast<int32_t>(std::floor(p.y() / cfg_.voxel_size)),
                  static_cast<int32_t>(std::floor(p.z() / cfg_.voxel_size))};
}

InsertCounts VoxelMap::insert(const std::vector<Vec3>& points,
                              int64_t frame_idx) {
  InsertCounts counts;
  const double min_d2 = cfg_.min_point_distance * cfg_.min_point_distance;
  for (const auto& p : points) {
    Voxel& v = voxels_[key_of(p)];
    v.last_seen = frame_idx;
    if (static_cast<int>(v.points.size()) >= cfg_.max_points_per_voxel) {
      ++counts.rejected_cap;
      continue;
    }
    bool near = false;
    for (const auto& q : v.points) {
      if ((p - q).squaredNorm() < min_d2) {
        near = true;
        break;
      }
    }
    if (near) {
      ++counts.rejected_near;
      continue;
    }
    v.points.push_back(p);
    ++counts.added;
  }
  return counts;
}

std::vector<Vec3> VoxelMap::nearest_neighbors(const Vec3& p, int k,
                                              double max_dist) const {
  const VoxelKey c = key_of(p);
  // Squared distance from p to each neighboring voxel slab, per axis; lets
  // us skip edge/corner voxels that cannot contain a point within max_dist.
  const double v = cfg_.voxel_size;
  double ax[3][3];
  const int32_t cc[3] = {c.x, c.y, c.z};
  for (int i = 0; i < 3; ++i) {
    for (int d = -1; d <= 1; ++d) {
      const double lo = (cc[i] + d) * v, hi = lo + v;
      const double g = std::max({0.0, lo - p(i), p(i) - hi});
      ax[i][d + 1] = g * g;
    }
  }
  const double max_d2 = max_dist * max_dist;
  std::vector<std::pair<double, Vec3>> cands;
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dz = -1; dz <= 1; ++dz) {
        if (ax[0][dx + 1] + ax[1][dy + 1] + ax[2][dz + 1] > max_d2) continue;
        auto it = voxels_.find(VoxelKey{c.x + dx, c.y + dy, c.z + dz});
        if (it == voxels_.end()) continue;
        for (const auto& q : it->second.points) {
          const double d2 = (q - p).squaredNorm();
          if (d2 <= max_dist * max_dist) cands.emplace_back(d2, q);
        }
      }
    }
  }
  const size_t kk = std::min<size_t>(k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + kk, cands.end(),
                    [](const auto& a, const auto& b) {
                      return a.first < b.first;
                    });
  std::vector<Vec3> out;
  out.reserve(kk);
  for (size_t i = 0; i < kk; ++i) out.push_back(cands[i].second);
  return out;
}

int VoxelMap::expire(int64_t frame_idx) {
  if (cfg_.expiry_frames == std::numeric_limits<int>::max()) return 0;
  int removed = 0;
  for (auto it = voxels_.begin(); it != voxels_.end();) {
    if (frame_idx - it->second.last_seen > cfg_.expiry_frames) {
      it = voxels_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

size_t VoxelMap::size() const {
  size_t n = 0;
  for (const auto& [k, v] : voxels_) n += v.points.size();
  return n;
}

void VoxelMap::write_snapshot(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  for (const auto& [k, v] : voxels_) {
    for (const auto& p : v.points) {
      const float xyz[3] = {static_cast<float>(p.x()),
                            static_cast<float>(p.y()),
                            static_cast<float>(p.z())};
      f.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    }
  }
}

}  // namespace ctodom
