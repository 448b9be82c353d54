#include "ctodom/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "ctodom/voxel_map.hpp"

namespace ctodom {

LidarFrame downsample_lidar(const LidarFrame& frame, double voxel,
                            uint64_t seed) {
  LidarFrame out;
  out.t_start = frame.t_start;
  out.t_end = frame.t_end;
  std::vector<size_t> order(frame.points.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::unordered_set<VoxelKey, VoxelKeyHash> seen;
  for (size_t idx : order) {
    const auto& pt = frame.points[idx];
    VoxelKey key{static_cast<int32_t>(std::floor(pt.p.x() / voxel)),
                 static_cast<int32_t>(std::floor(pt.p.y() / voxel)),
                 static_cast<int32_t>(std::floor(pt.p.z() / voxel))};
    if (seen.insert(key).second) out.points.push_back(pt);
  }
  return out;
}

LidarFrame bin_timestamps(const LidarFrame& frame, double freq) {
  if (freq <= 0.0 || !std::isfinite(freq)) return frame;
  LidarFrame out = frame;
  for (auto& pt : out.points) pt.time = std::round(pt.time * freq) / freq;
  return out;
}

LidarFrame crop_lidar(const LidarFrame& frame, double min_range,
                      double max_range) {
  LidarFrame out;
  out.t_start = frame.t_start;
  out.t_end = frame.t_end;
  for (const auto& pt : frame.points) {
    const double r = pt.p.norm();
    if (r >= min_range && r <= max_range) out.points.push_back(pt);
  }
  return out;
}

std::vector<CfarDetection> gocfar_detect(const PolarScan& scan,
                                         const CfarConfig& cfg) {
  std::vector<CfarDetection> out;
  const int margin = cfg.train_cells + cfg.guard_cells;
  const int R = static_cast<int>(scan.num_range_bins);
  for (uint32_t a = 0; a < scan.num_azimuths; ++a) {
    for (int r = margin; r < R - margin; ++r) {
      const double p = scan.at(a, r);
      if (p <= cfg.noise_floor) continue;
      double left = 0.0, right = 0.0;
      for (int i = 1; i <= cfg.train_cells; ++i) {
        left += scan.at(a, r - cfg.guard_cells - i);
        right += scan.at(a, r + cfg.guard_cells + i);
      }
      left /= cfg.train_cells;
      right /= cfg.train_cells;
      if (p > cfg.threshold_factor * std::max(left, right)) {
        out.push_back({a, static_cast<uint32_t>(r),
                       scan.at(a, static_cast<uint32_t>(r))});
      }
    }
  }
  return out;
}

std::vector<RadarPoint> polar_to_cartesian(
    const std::vector<CfarDetection>& detections, const PolarScan& scan) {
  std::vector<RadarPoint> out;
  out.reserve(detections.size());
  for (const auto& d : detections) {
    const double r = (d.range_bin + 0.5) * scan.range_resolution;
    const double th = scan.azimuth_angles[d.azimuth];
    RadarPoint pt;
    pt.p = Vec3(r * std::cos(th), r * std::sin(th), 0.0);
    pt.time = scan.azimuth_times[d.azimuth];
    out.push_back(pt);
  }
  return out;
}

}  // namespace ctodom
