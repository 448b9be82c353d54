#include "ctodom/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Geometry>

namespace ctodom {
namespace {

[[noreturn]] void fail(const std::string& path, size_t record,
                       const std::string& what) {
  throw std::runtime_error(path + ": record " + std::to_string(record) + ": " +
                           what);
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  return in;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  return out;
}

std::vector<double> parse_row(const std::string& line, const std::string& path,
                              size_t record, size_t expected) {
  std::vector<double> vals;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      vals.push_back(std::stod(tok));
    } catch (const std::exception&) {
      fail(path, record, "bad number '" + tok + "'");
    }
  }
  if (vals.size() != expected)
    fail(path, record,
         "expected " + std::to_string(expected) + " fields, got " +
             std::to_string(vals.size()));
  return vals;
}

void span_from_points(LidarFrame& frame) {
  if (frame.points.empty()) return;
  frame.t_start = frame.points.front().time;
  frame.t_end = frame.points.front().time;
  for (const auto& pt : frame.points) {
    frame.t_start = std::min(frame.t_start, pt.time);
    frame.t_end = std::max(frame.t_end, pt.time);
  }
}

}  // namespace

LidarFrame read_lidar_bin(const std::string& path) {
  auto in = open_in(path, true);
  LidarFrame frame;
  size_t record = 0;
  while (true) {
    float xyz_i[4];
    double t;
    in.read(reinterpret_cast<char*>(xyz_i), sizeof(xyz_i));
    if (in.gcount() == 0 && in.eof()) break;
    in.read(reinterpret_cast<char*>(&t), sizeof(t));
    if (!in) fail(path, record, "truncated record");
    LidarPoint pt;
    pt.p = Vec3(xyz_i[0], xyz_i[1], xyz_i[2]);
    pt.intensity = xyz_i[3];
    pt.time = t;
    frame.points.push_back(pt);
    ++record;
  }
  span_from_points(frame);
  return frame;
}

void write_lidar_bin(const std::string& path, const LidarFrame& frame) {
  auto out = open_out(path, true);
  for (const auto& pt : frame.points) {
    float xyz_i[4] = {static_cast<float>(pt.p.x()),
                      static_cast<float>(pt.p.y()),
                      static_cast<float>(pt.p.z()),
                      static_cast<float>(pt.intensity)};
    double t = pt.time;
    out.write(reinterpret_cast<const char*>(xyz_i), sizeof(xyz_i));
    out.write(reinterpret_cast<const char*>(&t), sizeof(t));
  }
}

LidarFrame read_lidar_csv(const std::string& path) {
  auto in = open_in(path, false);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (line != "x,y,z,intensity,t")
    throw std::runtime_error(path + ": bad header '" + line + "'");
  LidarFrame frame;
  size_t record = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto v = parse_row(line, path, record, 5);
    LidarPoint pt;
    pt.p = Vec3(v[0], v[1], v[2]);
    pt.intensity = v[3];
    pt.time = v[4];
    frame.points.push_back(pt);
    ++record;
  }
  span_from_points(frame);
  return frame;
}

void write_lidar_csv(const std::string& path, const LidarFrame& frame) {
  auto out = open_out(path, false);
  out << "x,y,z,intensity,t\n";
  char buf[160];
  for (const auto& pt : frame.points) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.17g\n", pt.p.x(),
                  pt.p.y(), pt.p.z(), pt.intensity, pt.time);
    out << buf;
  }
}

PolarScan read_polar_scan(const std::string& path) {
  auto in = open_in(path, true);
  PolarScan scan;
  in.read(reinterpret_cast<char*>(&scan.num_azimuths), 4);
  in.read(reinterpret_cast<char*>(&scan.num_range_bins), 4);
  in.read(reinterpret_cast<char*>(&scan.range_resolution), 8);
  if (!in) throw std::runtime_error(path + ": truncated header");
  if (scan.num_azimuths == 0 || scan.num_range_bins == 0)
    throw std::runtime_error(path + ": zero-sized scan");
  scan.azimuth_times.resize(scan.num_azimuths);
  scan.azimuth_angles.resize(scan.num_azimuths);
  scan.power.resize(size_t(scan.num_azimuths) * scan.num_range_bins);
  in.read(reinterpret_cast<char*>(scan.azimuth_times.data()),
          8 * scan.num_azimuths);
  in.read(reinterpret_cast<char*>(scan.azimuth_angles.data()),
          8 * scan.num_azimuths);
  in.read(reinterpret_cast<char*>(scan.power.data()), scan.power.size());
  if (!in) throw std::runtime_error(path + ": truncated payload");
  return scan;
}

void write_polar_scan(const std::string& path, const PolarScan& scan) {
  auto out = open_out(path, true);
  out.write(reinterpret_cast<const char*>(&scan.num_azimuths), 4);
  out.write(reinterpret_cast<const char*>(&scan.num_range_bins), 4);
  out.write(reinterpret_cast<const char*>(&scan.range_resolution), 8);
  out.write(reinterpret_cast<const char*>(scan.azimuth_times.data()),
            8 * scan.num_azimuths);
  out.write(reinterpret_cast<const char*>(scan.azimuth_angles.data()),
            8 * scan.num_azimuths);
  out.write(reinterpret_cast<const char*>(scan.power.data()),
            scan.power.size());
}

std::vector<ImuSample> read_imu_csv(const std::string& path) {
  auto in = open_in(path, false);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (line != "t,wx,wy,wz,ax,ay,az")
    throw std::runtime_error(path + ": bad header '" + line + "'");
  std::vector<ImuSample> samples;
  size_t record = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto v = parse_row(line, path, record, 7);
    ImuSample s;
    s.time = v[0];
    s.omega = Vec3(v[1], v[2], v[3]);
    s.accel = Vec3(v[4], v[5], v[6]);
    samples.push_back(s);
    ++record;
  }
  return samples;
}

void write_imu_csv(const std::string& path,
                   const std::vector<ImuSample>& samples) {
  auto out = open_out(path, false);
  out << "t,wx,wy,wz,ax,ay,az\n";
  char buf[240];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.time,
                  s.omega.x(), s.omega.y(), s.omega.z(), s.accel.x(),
                  s.accel.y(), s.accel.z());
    out << buf;
  }
}

Calib read_calib(const std::string& path) {
  auto in = open_in(path, false);
  Calib calib;
  double m[12];
  for (int i = 0; i < 12; ++i) {
    if (!(in >> m[i])) fail(path, 0, "expected 12 extrinsic floats");
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) calib.t_vs.C(r, c) = m[4 * r + c];
    calib.t_vs.r(r) = m[4 * r + 3];
  }
  calib.t_vs.orthonormalize();
  if (!(in >> calib.beta)) fail(path, 1, "expected beta");
  return calib;
}

void write_calib(const std::string& path, const Calib& calib) {
  auto out = open_out(path, false);
  char buf[64];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      double v = (c < 3) ? calib.t_vs.C(r, c) : calib.t_vs.r(r);
      std::snprintf(buf, sizeof(buf), "%.17g%c", v,
                    (r == 2 && c == 3) ? '\n' : ' ');
      out << buf;
    }
  }
  std::snprintf(buf, sizeof(buf), "%.17g\n", calib.beta);
  out << buf;
}

Trajectory read_trajectory_tum(const std::string& path) {
  auto in = open_in(path, false);
  Trajectory traj;
  std::string line;
  size_t record = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    double t, x, y, z, qx, qy, qz, qw;
    if (!(ss >> t >> x >> y >> z >> qx >> qy >> qz >> qw))
      fail(path, record, "expected `t x y z qx qy qz qw`");
    StampedPose sp;
    sp.time = t;
    sp.t_wv.r = Vec3(x, y, z);
    sp.t_wv.C = Eigen::Quaterniond(qw, qx, qy, qz).normalized().toRotationMatrix();
    traj.push_back(sp);
    ++record;
  }
  return traj;
}

void write_trajectory_tum(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path, false);
  char buf[320];
  for (const auto& sp : traj) {
    Eigen::Quaterniond q(sp.t_wv.C);
    std::snprintf(buf, sizeof(buf),
                  "%.9f %.9f %.9f %.9f %.12f %.12f %.12f %.12f\n", sp.time,
                  sp.t_wv.r.x(), sp.t_wv.r.y(), sp.t_wv.r.z(), q.x(), q.y(),
                  q.z(), q.w());
    out << buf;
  }
}

Trajectory read_trajectory_kitti(const std::string& path) {
  auto in = open_in(path, false);
  Trajectory traj;
  std::string line;
  size_t record = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    double m[12];
    for (int i = 0; i < 12; ++i) {
      if (!(ss >> m[i])) fail(path, record, "expected 12 floats");
    }
    StampedPose sp;
    sp.time = static_cast<double>(record);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) sp.t_wv.C(r, c) = m[4 * r + c];
      sp.t_wv.r(r) = m[4 * r + 3];
    }
    sp.t_wv.orthonormalize();
    traj.push_back(sp);
    ++record;
  }
  return traj;
}

void write_trajectory_kitti(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path, false);
  char buf[480];
  for (const auto& sp : traj) {
    int n = 0;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        double v = (c < 3) ? sp.t_wv.C(r, c) : sp.t_wv.r(r);
        n += std::snprintf(buf + n, sizeof(buf) - n, "%.12g%c", v,
                           (r == 2 && c == 3) ? '\n' : ' ');
      }
    }
    out << buf;
  }
}

Config Config::from_file(const std::string& path) {
  auto in = open_in(path, false);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_string(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::stringstream in(text);
  std::string line;
  size_t lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    size_t a = s.find_first_not_of(ws);
    if (a == std::string::npos) return std::string();
    size_t b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": expected `key = value`");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": empty key");
    cfg.map_[key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return map_.count(key) > 0; }

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  auto it = map_.find(key);
  return it == map_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = map_.find(key);
  if (it == map_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': bad number '" +
                             it->second + "'");
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  auto it = map_.find(key);
  if (it == map_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': bad integer '" +
                             it->second + "'");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = map_.find(key);
  if (it == map_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::runtime_error("config key '" + key + "': bad bool '" +
                           it->second + "'");
}

void Config::set(const std::string& key, const std::string& value) {
  map_[key] = value;
}

DatasetIndex scan_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw std::runtime_error(dir + ": not a directory");
  DatasetIndex idx;
  std::vector<std::pair<long, std::string>> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    const std::string ext = entry.path().extension().string();
    if (name == "imu.csv") {
      idx.imu_path = entry.path().string();
      continue;
    }
    if (name == "calib.txt") {
      idx.calib_path = entry.path().string();
      continue;
    }
    if (name == "gt.tum") {
      idx.gt_path = entry.path().string();
      continue;
    }
    if (ext != ".bin" && ext != ".csv" && ext != ".rad") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() ||
        stem.find_first_not_of("0123456789") != std::string::npos)
      continue;
    if (ext == ".rad") idx.radar = true;
    frames.emplace_back(std::stol(stem), entry.path().string());
  }
  std::sort(frames.begin(), frames.end());
  for (auto& [i, p] : frames) idx.frame_paths.push_back(std::move(p));
  return idx;
}

}  // namespace ctodom
