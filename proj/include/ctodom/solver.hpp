#pragma once

#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "ctodom/gp_prior.hpp"
#include "ctodom/icp.hpp"
#include "ctodom/imu.hpp"
#include "ctodom/liegroup.hpp"

namespace ctodom {

// Per-knot parameterization: [pose eps (6), velocity eta (6), bias (6)].
inline constexpr int kKnotDim = 18;

struct SolverConfig {
  int inner_max = 5;
  int outer_max = 10;
  double t_inner = 1e-5;
  double t_outer = 1e-4;   // Dist(.) threshold between outer iterations
  double dj_rel = 1e-6;    // relative cost-change threshold
  int extra_knots_per_frame = 0;
  int window_frames = 2;   // frames retained in the sliding window
  double lm_lambda0 = 1e-6;
  double lm_growth = 10.0;
  int lm_max_retries = 5;
};

// One factor linearized at the current estimate: error e, information W
// (robust weights folded in), and Jacobian blocks d e / d x_knot (r x 18).
struct FactorBlock {
  int knot = 0;
  Eigen::MatrixXd jac;
};

struct LinearizedFactor {
  Eigen::VectorXd error;
  Eigen::MatrixXd info;
  std::vector<FactorBlock> blocks;
};

// Quadratic prior left by marginalization, anchored at the states the
// remaining knots had when the departing knot was eliminated.
struct MargPrior {
  Eigen::MatrixXd a;  // (18 m) x (18 m), m = lin.size()
  Eigen::VectorXd c;
  std::vector<TrajectoryKnot> lin;  // oldest first, aligned with window front

  bool valid() const { return a.size() > 0; }
};

struct SlidingWindow {
  std::deque<TrajectoryKnot> knots;
  MargPrior prior;
};

// Deviation of x from lin: [log(T T_lin^-1); vel - vel_lin; bias - bias_lin].
Eigen::Matrix<double, kKnotDim, 1> knot_boxminus(const TrajectoryKnot& x,
                                                 const TrajectoryKnot& lin);
// T <- exp(dx[0:6]^) T, vel += dx[6:12], bias += dx[12:18].
void knot_update(TrajectoryKnot& knot,
                 const Eigen::Ref<const Eigen::VectorXd>& dx);

// Constant-velocity extrapolation of the newest knot to t_k (the GP mean).
TrajectoryKnot init_knot(const SlidingWindow& window, double t_k);

// Index i such that knots[i].time <= tau <= knots[i+1].time (clamped).
int bracket_interval(const SlidingWindow& window, double tau);

// A = prior + sum J^T W J, c = prior rhs + sum J^T W e, over 18-dof knots.
void build_normal_equations(const SlidingWindow& window,
                            const std::vector<LinearizedFactor>& factors,
                            Eigen::MatrixXd* a, Eigen::VectorXd* c);

// Cholesky solve of A dx = c with Levenberg-damped retries; false once the
// retry budget is exhausted.
bool gauss_newton_step(const Eigen::MatrixXd& a, const Eigen::VectorXd& c,
                       const SolverConfig& cfg, Eigen::VectorXd* dx);

void update_window(SlidingWindow& window, const Eigen::VectorXd& dx);

// Schur-eliminates the first `count` knots. `factors` must hold every factor
// touching a departing knot, linearized at the current (departure) estimate;
// the reduced prior then covers all remaining knots those factors reach.
void slide_and_marginalize(SlidingWindow& window,
                           const std::vector<LinearizedFactor>& factors,
                           int count = 1);

// Marginal covariance from the last normal-equation matrix: 12x12 joint
// (pose, velocity) at time t, GP-interpolated between knots.
Mat12 query_covariance(const SlidingWindow& window, const Eigen::MatrixXd& a,
                       double t);

// ---- Factor linearizers -------------------------------------------------

// Memoizes GP interpolation per query time. Many measurements share a
// timestamp (e.g. one lidar azimuth column), so callers that relinearize a
// whole bundle pass one cache per linearization point and clear it whenever
// the window state changes.
struct InterpCacheEntry {
  int k = -1;
  InterpolatedState state;
  InterpJacobians jac;
  bool has_jac = false;
};
using InterpCache = std::unordered_map<double, InterpCacheEntry>;

LinearizedFactor linearize_motion_prior(const SlidingWindow& window, int k,
                                        const PriorHyperparams& q);

LinearizedFactor linearize_bias_prior(const SlidingWindow& window, int k,
                                      const Vec6& qb_diag);

// Point-to-plane factor at qp.time, routed through the GP interpolation.
LinearizedFactor linearize_p2plane(const SlidingWindow& window,
                                   const QueryPoint& qp,
                                   const Correspondence& corr,
                                   const Extrinsics& ext,
                                   const PriorHyperparams& q, double meas_var,
                                   const RobustLoss& loss,
                                   InterpCache* cache = nullptr);

// Radar point-to-point factor with Doppler range correction.
LinearizedFactor linearize_p2p_radar(const SlidingWindow& window,
                                     const QueryPoint& qp,
                                     const Correspondence& corr,
                                     const Extrinsics& ext,
                                     const PriorHyperparams& q,
                                     double meas_var, const RobustLoss& loss,
                                     InterpCache* cache = nullptr);

// Gyroscope factor at sample.time; bias taken from the bracketing left knot.
LinearizedFactor linearize_gyro(const SlidingWindow& window,
                                const ImuSample& sample,
                                const PriorHyperparams& q,
                                const Mat3& r_omega,
                                InterpCache* cache = nullptr);

// Preintegrated-velocity factor over (knots[k].time, knots[k+1].time];
// attitudes for the gravity term come from the current interpolated poses and
// are held fixed within the factor.
LinearizedFactor linearize_preint(const SlidingWindow& window, int k,
                                  const std::vector<ImuSample>& samples,
                                  const Vec3& gravity_inertial,
                                  const PriorHyperparams& q,
                                  const Mat3& r_accel, bool mode_2d,
                                  InterpCache* cache = nullptr);

// Unary pin on a knot (gauge fixing / initial prior). info_diag is the
// 18-vector of information diagonal entries.
LinearizedFactor linearize_pin(const SlidingWindow& window, int k,
                               const TrajectoryKnot& target,
                               const Eigen::Matrix<double, kKnotDim, 1>&
                                   info_diag);

double total_cost(const std::vector<LinearizedFactor>& factors);

// ---- Constant-velocity baseline ------------------------------------------

// Single-pose point-to-plane solve with fixed-twist deskew and no motion
// prior: varpi_check = log(T_km1 T_km2^-1) / dt, points deskewed by
// exp((t_k - tau_j) varpi_check^).
struct CvStepResult {
  Pose t_k;         // T_vi at t_k
  Vec6 varpi;       // twist used for deskew
  int iterations = 0;
  bool converged = false;
};

CvStepResult constant_velocity_step(
    const Pose& t_km2, const Pose& t_km1, double dt_prev, double t_km1_time,
    double t_k, const std::vector<QueryPoint>& points,
    const std::function<bool(const Vec3&, Correspondence*)>& match,
    const Extrinsics& ext, const RobustLoss& loss, double meas_var,
    int max_iterations = 20);

}  // namespace ctodom
