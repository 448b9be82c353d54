#pragma once

#include <cstdint>
#include <vector>

#include "ctodom/liegroup.hpp"

namespace ctodom {

struct LidarPoint {
  Vec3 p = Vec3::Zero();
  double intensity = 0.0;
  double time = 0.0;
};

struct LidarFrame {
  std::vector<LidarPoint> points;
  double t_start = 0.0;
  double t_end = 0.0;
};

struct PolarScan {
  uint32_t num_azimuths = 0;
  uint32_t num_range_bins = 0;
  double range_resolution = 0.0;  // m per bin
  std::vector<double> azimuth_times;
  std::vector<double> azimuth_angles;
  std::vector<uint8_t> power;  // row-major by azimuth, A x R

  uint8_t at(uint32_t a, uint32_t r) const {
    return power[a * num_range_bins + r];
  }
};

struct CfarConfig {
  int train_cells = 12;
  int guard_cells = 4;
  double threshold_factor = 3.0;
  double noise_floor = 0.0;
};

struct CfarDetection {
  uint32_t azimuth = 0;
  uint32_t range_bin = 0;
  uint8_t power = 0;
};

struct RadarPoint {
  Vec3 p = Vec3::Zero();  // z = 0
  double time = 0.0;
};

// At most one point per voxel, first after a seeded shuffle.
LidarFrame downsample_lidar(const LidarFrame& frame, double voxel = 1.5,
                            uint64_t seed = 0);

// Rounds point times to the nearest 1/freq grid point; freq <= 0 disables.
LidarFrame bin_timestamps(const LidarFrame& frame, double freq);

// Drops points with range outside [min_range, max_range].
LidarFrame crop_lidar(const LidarFrame& frame, double min_range = 1.0,
                      double max_range = 120.0);

// Greatest-of CFAR: keep a cell iff power > threshold_factor * max(mean of
// left train window, mean of right train window) and power > noise_floor.
// Bins nearer than train+guard to either edge are skipped.
std::vector<CfarDetection> gocfar_detect(const PolarScan& scan,
                                         const CfarConfig& cfg);

// r = (bin + 0.5) * range_resolution; point time is the azimuth time.
std::vector<RadarPoint> polar_to_cartesian(
    const std::vector<CfarDetection>& detections, const PolarScan& scan);

}  // namespace ctodom
