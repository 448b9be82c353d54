#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "ctodom/io.hpp"

using namespace ctodom;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ctodom_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

LidarFrame random_frame(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  LidarFrame frame;
  for (int i = 0; i < n; ++i) {
    LidarPoint pt;
    pt.p = Vec3(u(rng), u(rng), u(rng));
    pt.intensity = std::abs(u(rng));
    pt.time = 10.0 + 0.001 * i;
    frame.points.push_back(pt);
  }
  frame.t_start = 10.0;
  frame.t_end = 10.0 + 0.001 * (n - 1);
  return frame;
}

Pose random_pose(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec6 xi;
  for (int i = 0; i < 6; ++i) xi(i) = u(rng);
  return se3_exp(xi);
}

}  // namespace

TEST_CASE("lidar binary round trip") {
  TempDir tmp;
  auto frame = random_frame(500, 1);
  write_lidar_bin(tmp.file("0.bin"), frame);
  auto back = read_lidar_bin(tmp.file("0.bin"));
  REQUIRE(back.points.size() == frame.points.size());
  for (size_t i = 0; i < frame.points.size(); ++i) {
    CHECK((back.points[i].p.cast<float>() - frame.points[i].p.cast<float>())
              .norm() == 0.0f);
    CHECK(back.points[i].intensity ==
          doctest::Approx(frame.points[i].intensity).epsilon(1e-6));
    CHECK(back.points[i].time == frame.points[i].time);
  }
  CHECK(back.t_start == frame.t_start);
  CHECK(back.t_end == frame.t_end);
}

TEST_CASE("lidar binary record layout is 24 bytes little endian") {
  TempDir tmp;
  LidarFrame frame;
  LidarPoint pt;
  pt.p = Vec3(1.0, 2.0, 3.0);
  pt.intensity = 4.0;
  pt.time = 5.0;
  frame.points.push_back(pt);
  write_lidar_bin(tmp.file("0.bin"), frame);
  CHECK(fs::file_size(tmp.file("0.bin")) == 24);
  std::ifstream in(tmp.file("0.bin"), std::ios::binary);
  float f;
  in.read(reinterpret_cast<char*>(&f), 4);
  CHECK(f == 1.0f);
  double t;
  in.seekg(16);
  in.read(reinterpret_cast<char*>(&t), 8);
  CHECK(t == 5.0);
}

TEST_CASE("lidar binary truncated record throws with record index") {
  TempDir tmp;
  auto frame = random_frame(3, 2);
  write_lidar_bin(tmp.file("0.bin"), frame);
  fs::resize_file(tmp.file("0.bin"), 3 * 24 - 5);
  CHECK_THROWS_WITH_AS(read_lidar_bin(tmp.file("0.bin")),
                       doctest::Contains("record 2"), std::runtime_error);
}

TEST_CASE("lidar csv round trip and header check") {
  TempDir tmp;
  auto frame = random_frame(200, 3);
  write_lidar_csv(tmp.file("0.csv"), frame);
  auto back = read_lidar_csv(tmp.file("0.csv"));
  REQUIRE(back.points.size() == frame.points.size());
  for (size_t i = 0; i < frame.points.size(); ++i) {
    CHECK((back.points[i].p - frame.points[i].p).norm() < 1e-7);
    CHECK(back.points[i].time == frame.points[i].time);
  }

  std::ofstream bad(tmp.file("bad.csv"));
  bad << "x,y,z,t\n";
  bad.close();
  CHECK_THROWS_AS(read_lidar_csv(tmp.file("bad.csv")), std::runtime_error);

  std::ofstream mal(tmp.file("mal.csv"));
  mal << "x,y,z,intensity,t\n1,2,3,4,5\n1,2,oops,4,5\n";
  mal.close();
  CHECK_THROWS_WITH_AS(read_lidar_csv(tmp.file("mal.csv")),
                       doctest::Contains("record 1"), std::runtime_error);
}

TEST_CASE("polar scan round trip") {
  TempDir tmp;
  PolarScan scan;
  scan.num_azimuths = 7;
  scan.num_range_bins = 11;
  scan.range_resolution = 0.0596;
  std::mt19937_64 rng(4);
  for (uint32_t a = 0; a < scan.num_azimuths; ++a) {
    scan.azimuth_times.push_back(2.0 + 0.01 * a);
    scan.azimuth_angles.push_back(0.1 * a);
  }
  for (uint32_t i = 0; i < scan.num_azimuths * scan.num_range_bins; ++i)
    scan.power.push_back(uint8_t(rng() & 0xff));
  write_polar_scan(tmp.file("0.rad"), scan);
  CHECK(fs::file_size(tmp.file("0.rad")) == 16 + 7 * 16 + 7 * 11);
  auto back = read_polar_scan(tmp.file("0.rad"));
  CHECK(back.num_azimuths == scan.num_azimuths);
  CHECK(back.num_range_bins == scan.num_range_bins);
  CHECK(back.range_resolution == scan.range_resolution);
  CHECK(back.azimuth_times == scan.azimuth_times);
  CHECK(back.azimuth_angles == scan.azimuth_angles);
  CHECK(back.power == scan.power);

  fs::resize_file(tmp.file("0.rad"), 10);
  CHECK_THROWS_AS(read_polar_scan(tmp.file("0.rad")), std::runtime_error);
}

TEST_CASE("imu csv round trip") {
  TempDir tmp;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<ImuSample> samples;
  for (int i = 0; i < 100; ++i) {
    ImuSample s;
    s.time = 0.005 * i;
    s.omega = Vec3(n(rng), n(rng), n(rng));
    s.accel = Vec3(n(rng), n(rng), n(rng));
    samples.push_back(s);
  }
  write_imu_csv(tmp.file("imu.csv"), samples);
  auto back = read_imu_csv(tmp.file("imu.csv"));
  REQUIRE(back.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    CHECK(back[i].time == samples[i].time);
    CHECK((back[i].omega - samples[i].omega).norm() == 0.0);
    CHECK((back[i].accel - samples[i].accel).norm() == 0.0);
  }
}

TEST_CASE("calib round trip") {
  TempDir tmp;
  Calib calib;
  calib.t_vs = random_pose(6);
  calib.t_vs.r = Vec3(0.1, -0.2, 0.3);
  calib.beta = 0.049;
  write_calib(tmp.file("calib.txt"), calib);
  auto back = read_calib(tmp.file("calib.txt"));
  CHECK((back.t_vs.C - calib.t_vs.C).norm() < 1e-12);
  CHECK((back.t_vs.r - calib.t_vs.r).norm() < 1e-12);
  CHECK(back.beta == calib.beta);

  std::ofstream bad(tmp.file("bad.txt"));
  bad << "1 0 0 0 0 1 0 0\n";
  bad.close();
  CHECK_THROWS_AS(read_calib(tmp.file("bad.txt")), std::runtime_error);
}

TEST_CASE("tum trajectory round trip") {
  TempDir tmp;
  Trajectory traj;
  for (int i = 0; i < 20; ++i) {
    StampedPose sp;
    sp.time = 0.1 * i;
    sp.t_wv = random_pose(100 + i);
    traj.push_back(sp);
  }
  write_trajectory_tum(tmp.file("t.tum"), traj);
  auto back = read_trajectory_tum(tmp.file("t.tum"));
  REQUIRE(back.size() == traj.size());
  for (size_t i = 0; i < traj.size(); ++i) {
    CHECK(back[i].time == doctest::Approx(traj[i].time).epsilon(1e-9));
    CHECK((back[i].t_wv.C - traj[i].t_wv.C).norm() < 1e-8);
    CHECK((back[i].t_wv.r - traj[i].t_wv.r).norm() < 1e-8);
  }

  std::ofstream mal(tmp.file("mal.tum"));
  mal << "0 1 2 3 0 0 0 1\n0 1 2\n";
  mal.close();
  CHECK_THROWS_WITH_AS(read_trajectory_tum(tmp.file("mal.tum")),
                       doctest::Contains("record 1"), std::runtime_error);
}

TEST_CASE("kitti trajectory round trip") {
  TempDir tmp;
  Trajectory traj;
  for (int i = 0; i < 15; ++i) {
    StampedPose sp;
    sp.time = double(i);
    sp.t_wv = random_pose(200 + i);
    traj.push_back(sp);
  }
  write_trajectory_kitti(tmp.file("t.kitti"), traj);
  auto back = read_trajectory_kitti(tmp.file("t.kitti"));
  REQUIRE(back.size() == traj.size());
  for (size_t i = 0; i < traj.size(); ++i) {
    CHECK(back[i].time == double(i));
    CHECK((back[i].t_wv.C - traj[i].t_wv.C).norm() < 1e-9);
    CHECK((back[i].t_wv.r - traj[i].t_wv.r).norm() < 1e-9);
  }
}

TEST_CASE("config parsing") {
  auto cfg = Config::from_string(
      "# comment\n"
      "solver.inner_max = 5\n"
      "solver.t_inner = 1e-5\n"
      "pipeline.mode = lio\n"
      "\n"
      "frontend.voxel=1.5\n"
      "imu.enabled = true\n");
  CHECK(cfg.get_int("solver.inner_max", 0) == 5);
  CHECK(cfg.get_double("solver.t_inner", 0.0) == 1e-5);
  CHECK(cfg.get_string("pipeline.mode") == "lio");
  CHECK(cfg.get_double("frontend.voxel", 0.0) == 1.5);
  CHECK(cfg.get_bool("imu.enabled", false));
  CHECK(cfg.get_int("missing.key", 42) == 42);
  CHECK_FALSE(cfg.has("missing.key"));

  CHECK_THROWS_AS(Config::from_string("no equals sign\n"), std::runtime_error);
  CHECK_THROWS_AS(cfg.get_int("pipeline.mode", 0), std::runtime_error);
}

TEST_CASE("dataset scan orders frames by integer index") {
  TempDir tmp;
  auto frame = random_frame(5, 7);
  for (int i : {0, 2, 10, 1}) {
    write_lidar_bin(tmp.file(std::to_string(i) + ".bin"), frame);
  }
  write_imu_csv(tmp.file("imu.csv"), {});
  Calib calib;
  calib.t_vs = Pose();
  write_calib(tmp.file("calib.txt"), calib);
  std::ofstream(tmp.file("notes.txt")) << "ignored\n";

  auto idx = scan_dataset(tmp.path.string());
  REQUIRE(idx.frame_paths.size() == 4);
  CHECK(fs::path(idx.frame_paths[0]).filename() == "0.bin");
  CHECK(fs::path(idx.frame_paths[1]).filename() == "1.bin");
  CHECK(fs::path(idx.frame_paths[2]).filename() == "2.bin");
  CHECK(fs::path(idx.frame_paths[3]).filename() == "10.bin");
  CHECK(!idx.imu_path.empty());
  CHECK(!idx.calib_path.empty());
  CHECK(idx.gt_path.empty());
  CHECK_FALSE(idx.radar);

  CHECK_THROWS_AS(scan_dataset(tmp.file("nope")), std::runtime_error);
}
