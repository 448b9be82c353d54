#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctodom/liegroup.hpp"

namespace ctodom {

struct VoxelMapConfig {
  double voxel_size = 1.0;
  int max_points_per_voxel = 20;
  double min_point_distance = 0.1;
  // Frames without observation before a voxel is purged; INT_MAX disables.
  int expiry_frames = 10;
  // Skip insertion unless the vehicle moved at least this far since the last
  // map update; <= 0 disables keyframing.
  double keyframe_distance = 0.0;
};

struct InsertCounts {
  int added = 0;
  int rejected_cap = 0;
  int rejected_near = 0;
};

struct VoxelKey {
  int32_t x = 0, y = 0, z = 0;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  size_t operator()(const VoxelKey& k) const {
    size_t h = static_cast<uint32_t>(k.x);
    h = h * 0x9e3779b97f4a7c15ULL + static_cast<uint32_t>(k.y);
    h = h * 0x9e3779b97f4a7c15ULL + static_cast<uint32_t>(k.z);
    return h;
  }
};

struct Voxel {
  std::vector<Vec3> points;
  int64_t last_seen = 0;
};

struct NormalEstimate {
  Vec3 n = Vec3::UnitZ();
  double alpha = 0.0;
  bool valid = false;
};

// PCA plane fit over >= 5 neighbors; the normal is oriented toward the
// sensor origin. alpha from plane_weight on the eigenvalues.
NormalEstimate estimate_normal(const std::vector<Vec3>& neighbors,
                               const Vec3& sensor_origin);

class VoxelMap {
 public:
  explicit VoxelMap(const VoxelMapConfig& cfg = {}) : cfg_(cfg) {}

  InsertCounts insert(const std::vector<Vec3>& points, int64_t frame_idx);

  // Exact k-NN over the 27-voxel neighborhood of p (max_dist <= voxel_size
  // keeps this exact).
  std::vector<Vec3> nearest_neighbors(const Vec3& p, int k,
                                      double max_dist) const;

  // Removes voxels not observed for more than cfg.expiry_frames frames.
  int expire(int64_t frame_idx);

  size_t size() const;
  size_t voxel_count() const { return voxels_.size(); }
  const VoxelMapConfig& config() const { return cfg_; }

  VoxelKey key_of(const Vec3& p) const;
  const std::unordered_map<VoxelKey, Voxel, VoxelKeyHash>& voxels() const {
    return voxels_;
  }

  // Binary little-endian float32 x,y,z triples.
  void write_snapshot(const std::string& path) const;

 private:
  VoxelMapConfig cfg_;
  std::unordered_map<VoxelKey, Voxel, VoxelKeyHash> voxels_;
};

}  // namespace ctodom
