#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctodom/eval.hpp"
#include "ctodom/frontend.hpp"
#include "ctodom/imu.hpp"
#include "ctodom/liegroup.hpp"

namespace ctodom {

// Lidar frame file: binary little-endian records
// [float32 x, y, z, intensity; float64 t].
LidarFrame read_lidar_bin(const std::string& path);
void write_lidar_bin(const std::string& path, const LidarFrame& frame);

// Sibling CSV alternative, header `x,y,z,intensity,t`.
LidarFrame read_lidar_csv(const std::string& path);
void write_lidar_csv(const std::string& path, const LidarFrame& frame);

// Polar scan file: header (uint32 A, uint32 R, float64 range_resolution)
// + float64 azimuth_times[A] + float64 azimuth_angles[A]
// + uint8 power[A*R], row-major by azimuth.
PolarScan read_polar_scan(const std::string& path);
void write_polar_scan(const std::string& path, const PolarScan& scan);

// IMU file: CSV with header `t,wx,wy,wz,ax,ay,az`.
std::vector<ImuSample> read_imu_csv(const std::string& path);
void write_imu_csv(const std::string& path,
                   const std::vector<ImuSample>& samples);

struct Calib {
  Pose t_vs;          // sensor-to-vehicle extrinsic
  double beta = 0.0;  // Doppler range-shift constant (s)
};

// calib.txt: first line 12 floats (row-major 3x4 of T_vs), second line beta.
Calib read_calib(const std::string& path);
void write_calib(const std::string& path, const Calib& calib);

// TUM trajectory: `t x y z qx qy qz qw` per line, poses world-from-vehicle.
Trajectory read_trajectory_tum(const std::string& path);
void write_trajectory_tum(const std::string& path, const Trajectory& traj);

// KITTI trajectory: 12 floats per line (row-major 3x4), no timestamps; reading
// assigns index-based times unless `times` is given.
Trajectory read_trajectory_kitti(const std::string& path);
void write_trajectory_kitti(const std::string& path, const Trajectory& traj);

// Plain-text `key = value` config with dotted section keys. Lines starting
// with '#' and blank lines are ignored.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  void set(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& entries() const { return map_; }

 private:
  std::map<std::string, std::string> map_;
};

// Dataset layout: directory of frame files named by integer index
// (<idx>.bin / <idx>.csv for lidar, <idx>.rad for radar), plus imu.csv,
// calib.txt and optional gt.tum.
struct DatasetIndex {
  std::vector<std::string> frame_paths;  // sorted by integer index
  std::string imu_path;                  // empty if absent
  std::string calib_path;                // empty if absent
  std::string gt_path;                   // empty if absent
  bool radar = false;                    // frames are .rad polar scans
};

DatasetIndex scan_dataset(const std::string& dir);

}  // namespace ctodom
