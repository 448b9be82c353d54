// Python bindings for the core operations: Lie-group utilities, GP
// interpolation, the simulator, the odometry pipeline, and evaluation.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ctodom/eval.hpp"
#include "ctodom/frontend.hpp"
#include "ctodom/io.hpp"
#include "ctodom/pipeline.hpp"
#include "ctodom/sim.hpp"

namespace py = pybind11;
using namespace ctodom;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Continuous-time lidar/radar-inertial odometry";

  // ---- Lie group ----------------------------------------------------------
  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init<const Mat3&, const Vec3&>(), py::arg("C"), py::arg("r"))
      .def_readwrite("C", &Pose::C)
      .def_readwrite("r", &Pose::r)
      .def("matrix", &Pose::matrix)
      .def("inverse", &Pose::inverse)
      .def("adjoint", &Pose::adjoint)
      .def("__mul__",
           [](const Pose& a, const Pose& b) { return a * b; })
      .def("__mul__",
           [](const Pose& a, const Vec3& p) { return a * p; });
  m.def("se3_exp", &se3_exp, py::arg("xi"));
  m.def("se3_log", &se3_log, py::arg("T"));
  m.def("left_jacobian", &left_jacobian, py::arg("xi"));
  m.def("left_jacobian_inv", &left_jacobian_inv, py::arg("xi"));

  // ---- GP prior and interpolation ----------------------------------------
  py::class_<PriorHyperparams>(m, "PriorHyperparams")
      .def(py::init<>())
      .def_readwrite("q_diag", &PriorHyperparams::q_diag)
      .def_readwrite("qb_diag", &PriorHyperparams::qb_diag);
  py::class_<TrajectoryKnot>(m, "TrajectoryKnot")
      .def(py::init<>())
      .def_readwrite("time", &TrajectoryKnot::time)
      .def_readwrite("pose", &TrajectoryKnot::pose)
      .def_readwrite("velocity", &TrajectoryKnot::velocity)
      .def_readwrite("bias", &TrajectoryKnot::bias);
  py::class_<InterpolatedState>(m, "InterpolatedState")
      .def_readonly("pose", &InterpolatedState::pose)
      .def_readonly("velocity", &InterpolatedState::velocity);
  m.def("interpolate_state", &interpolate_state, py::arg("knot_k"),
        py::arg("knot_k1"), py::arg("tau"), py::arg("q"));
  m.def(
      "motion_prior_error",
      [](const TrajectoryKnot& k0, const TrajectoryKnot& k1) {
        return motion_prior_error(k0, k1);
      },
      py::arg("knot_k"), py::arg("knot_k1"));

  // ---- Measurement containers ---------------------------------------------
  py::class_<ImuSample>(m, "ImuSample")
      .def(py::init<>())
      .def_readwrite("time", &ImuSample::time)
      .def_readwrite("omega", &ImuSample::omega)
      .def_readwrite("accel", &ImuSample::accel);
  py::class_<LidarPoint>(m, "LidarPoint")
      .def(py::init<>())
      .def_readwrite("p", &LidarPoint::p)
      .def_readwrite("intensity", &LidarPoint::intensity)
      .def_readwrite("time", &LidarPoint::time);
  py::class_<LidarFrame>(m, "LidarFrame")
      .def(py::init<>())
      .def_readwrite("points", &LidarFrame::points)
      .def_readwrite("t_start", &LidarFrame::t_start)
      .def_readwrite("t_end", &LidarFrame::t_end)
      .def("__len__",
           [](const LidarFrame& f) { return f.points.size(); });
  py::class_<PolarScan>(m, "PolarScan")
      .def(py::init<>())
      .def_readonly("num_azimuths", &PolarScan::num_azimuths)
      .def_readonly("num_range_bins", &PolarScan::num_range_bins);

  // ---- Simulator ------------------------------------------------------
  py::enum_<MotionProfile>(m, "MotionProfile")
      .value("stationary", MotionProfile::stationary)
      .value("smooth_drive", MotionProfile::smooth_drive)
      .value("fast_drive", MotionProfile::fast_drive)
      .value("spin_aggressive", MotionProfile::spin_aggressive);
  py::class_<World>(m, "World")
      .def_readonly("landmarks", &World::landmarks);
  m.def("make_box_world", &make_box_world, py::arg("half") = 50.0,
        py::arg("height") = 4.0, py::arg("num_landmarks") = 24,
        py::arg("landmark_radius") = 35.0);
  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("duration", &SimConfig::duration)
      .def_readwrite("imu_rate", &SimConfig::imu_rate)
      .def_readwrite("lidar_rate", &SimConfig::lidar_rate)
      .def_readwrite("lidar_range_std", &SimConfig::lidar_range_std)
      .def_readwrite("radar_azimuths", &SimConfig::radar_azimuths)
      .def_readwrite("radar_scan_period", &SimConfig::radar_scan_period)
      .def_readwrite("gyro_noise_std", &SimConfig::gyro_noise_std)
      .def_readwrite("accel_noise_std", &SimConfig::accel_noise_std)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("profile", &SimConfig::profile);
  py::class_<GroundTruthTrajectory>(m, "GroundTruthTrajectory")
      .def(py::init<MotionProfile>())
      .def("pose", &GroundTruthTrajectory::pose)
      .def("velocity", &GroundTruthTrajectory::velocity)
      .def("body_rate", &GroundTruthTrajectory::body_rate);
  m.def("sample_imu", &sample_imu, py::arg("traj"), py::arg("config"));
  m.def("render_lidar", &render_lidar, py::arg("traj"), py::arg("world"),
        py::arg("t_start"), py::arg("config"));
  m.def("render_radar", &render_radar, py::arg("traj"), py::arg("world"),
        py::arg("t_start"), py::arg("config"));

  // ---- Pipeline -------------------------------------------------------
  py::enum_<PipelineMode>(m, "PipelineMode")
      .value("lo", PipelineMode::lo)
      .value("lio", PipelineMode::lio)
      .value("ro", PipelineMode::ro)
      .value("rio", PipelineMode::rio)
      .value("cv_baseline", PipelineMode::cv_baseline);
  py::class_<Extrinsics>(m, "Extrinsics")
      .def(py::init<>())
      .def_readwrite("t_vs", &Extrinsics::t_vs)
      .def_readwrite("beta", &Extrinsics::beta);
  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("mode", &PipelineConfig::mode)
      .def_readwrite("prior", &PipelineConfig::prior)
      .def_readwrite("ext", &PipelineConfig::ext)
      .def_readwrite("init_velocity", &PipelineConfig::init_velocity);
  py::class_<FrameResult>(m, "FrameResult")
      .def_readonly("mid_time", &FrameResult::mid_time)
      .def_readonly("t_wv_mid", &FrameResult::t_wv_mid)
      .def_readonly("degenerate", &FrameResult::degenerate)
      .def_readonly("solver_failed", &FrameResult::solver_failed)
      .def_readonly("inner_iterations", &FrameResult::inner_iterations)
      .def_readonly("outer_iterations", &FrameResult::outer_iterations)
      .def_readonly("cost", &FrameResult::cost)
      .def_readonly("correspondences", &FrameResult::correspondences)
      .def_readonly("wall_time_ms", &FrameResult::wall_time_ms);
  py::class_<OdometryPipeline>(m, "OdometryPipeline")
      .def(py::init<const PipelineConfig&>())
      .def("process_lidar", &OdometryPipeline::process_lidar,
           py::arg("frame"), py::arg("imu") = std::vector<ImuSample>{})
      .def("process_radar", &OdometryPipeline::process_radar,
           py::arg("scan"), py::arg("imu") = std::vector<ImuSample>{});

  // ---- IO and evaluation ------------------------------------------------
  py::class_<StampedPose>(m, "StampedPose")
      .def(py::init<>())
      .def_readwrite("time", &StampedPose::time)
      .def_readwrite("t_wv", &StampedPose::t_wv);
  py::class_<RteResult>(m, "RteResult")
      .def_readonly("trans_percent", &RteResult::trans_percent)
      .def_readonly("rot_deg_per_100m", &RteResult::rot_deg_per_100m)
      .def_readonly("subsequences", &RteResult::subsequences);
  m.def(
      "kitti_rte",
      [](const Trajectory& est, const Trajectory& gt) {
        return kitti_rte(est, gt);
      },
      py::arg("estimate"), py::arg("ground_truth"));
  m.def(
      "ate_umeyama",
      [](const Trajectory& est, const Trajectory& gt) {
        return ate_umeyama(est, gt);
      },
      py::arg("estimate"), py::arg("ground_truth"));
  m.def("read_lidar_bin", &read_lidar_bin, py::arg("path"));
  m.def("read_imu_csv", &read_imu_csv, py::arg("path"));
  m.def("read_trajectory_tum", &read_trajectory_tum, py::arg("path"));
  m.def("write_trajectory_tum", &write_trajectory_tum, py::arg("path"),
        py::arg("trajectory"));
}
