#include "ctodom/solver.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <Eigen/Dense>

namespace ctodom {

namespace {

Eigen::Matrix<double, 12, 24> interp_gain(const InterpJacobians& ij) {
  Eigen::Matrix<double, 12, 24> g;
  g.block<6, 6>(0, 0) = ij.pose_wrt_pose_k;
  g.block<6, 6>(0, 6) = ij.pose_wrt_vel_k;
  g.block<6, 6>(0, 12) = ij.pose_wrt_pose_k1;
  g.block<6, 6>(0, 18) = ij.pose_wrt_vel_k1;
  g.block<6, 6>(6, 0) = ij.vel_wrt_pose_k;
  g.block<6, 6>(6, 6) = ij.vel_wrt_vel_k;
  g.block<6, 6>(6, 12) = ij.vel_wrt_pose_k1;
  g.block<6, 6>(6, 18) = ij.vel_wrt_vel_k1;
  return g;
}

// Fills (and reuses) a memoized interpolation entry at tau. With no cache,
// `scratch` holds the result for the single call.
const InterpCacheEntry& cached_interp(const SlidingWindow& window, int k,
                                      double tau, const PriorHyperparams& q,
                                      bool need_jac, InterpCache* cache,
                                      InterpCacheEntry* scratch) {
  InterpCacheEntry* e = cache ? &(*cache)[tau] : scratch;
  if (e->k != k) {
    e->k = k;
    e->state =
        interpolate_state(window.knots[k], window.knots[k + 1], tau, q);
    e->has_jac = false;
  }
  if (need_jac && !e->has_jac) {
    e->jac = interp_jacobians(window.knots[k], window.knots[k + 1], tau, q);
    e->has_jac = true;
  }
  return *e;
}

// Routes a measurement Jacobian wrt the interpolated (pose, vel) pair into
// the two bracketing 18-dof knot blocks.
void route_interp(const SlidingWindow& window, int k,
                  const Eigen::MatrixXd& jac_pose,
                  const Eigen::MatrixXd& jac_vel, double tau,
                  const PriorHyperparams& q, LinearizedFactor* out,
                  InterpCache* cache = nullptr) {
  InterpCacheEntry scratch;
  const auto& ij =
      cached_interp(window, k, tau, q, true, cache, &scratch).jac;
  const long r = jac_pose.rows();
  FactorBlock bk, bk1;
  bk.knot = k;
  bk1.knot = k + 1;
  bk.jac = Eigen::MatrixXd::Zero(r, kKnotDim);
  bk1.jac = Eigen::MatrixXd::Zero(r, kKnotDim);
  bk.jac.leftCols<6>() =
      jac_pose * ij.pose_wrt_pose_k + jac_vel * ij.vel_wrt_pose_k;
  bk.jac.middleCols<6>(6) =
      jac_pose * ij.pose_wrt_vel_k + jac_vel * ij.vel_wrt_vel_k;
  bk1.jac.leftCols<6>() =
      jac_pose * ij.pose_wrt_pose_k1 + jac_vel * ij.vel_wrt_pose_k1;
  bk1.jac.middleCols<6>(6) =
      jac_pose * ij.pose_wrt_vel_k1 + jac_vel * ij.vel_wrt_vel_k1;
  out->blocks.push_back(std::move(bk));
  out->blocks.push_back(std::move(bk1));
}

InterpolatedState state_at(const SlidingWindow& window, int k, double tau,
                           const PriorHyperparams& q,
                           InterpCache* cache = nullptr) {
  InterpCacheEntry scratch;
  return cached_interp(window, k, tau, q, false, cache, &scratch).state;
}

}  // namespace

Eigen::Matrix<double, kKnotDim, 1> knot_boxminus(const TrajectoryKnot& x,
                                                 const TrajectoryKnot& lin) {
  Eigen::Matrix<double, kKnotDim, 1> d;
  d.head<6>() = se3_log(x.pose * lin.pose.inverse());
  d.segment<6>(6) = x.velocity - lin.velocity;
  d.tail<6>() = x.bias - lin.bias;
  return d;
}

void knot_update(TrajectoryKnot& knot,
                 const Eigen::Ref<const Eigen::VectorXd>& dx) {
  knot.pose = se3_exp(dx.head<6>()) * knot.pose;
  knot.pose.orthonormalize();
  knot.velocity += dx.segment<6>(6);
  knot.bias += dx.tail<6>();
}

TrajectoryKnot init_knot(const SlidingWindow& window, double t_k) {
  if (window.knots.empty())
    throw std::invalid_argument("init_knot: empty window");
  const TrajectoryKnot& last = window.knots.back();
  const double dt = t_k - last.time;
  TrajectoryKnot knot;
  knot.time = t_k;
  knot.pose = se3_exp((dt * last.velocity).eval()) * last.pose;
  knot.velocity = last.velocity;
  knot.bias = last.bias;
  return knot;
}

int bracket_interval(const SlidingWindow& window, double tau) {
  const int n = static_cast<int>(window.knots.size());
  if (n < 2) throw std::invalid_argument("bracket_interval: need >= 2 knots");
  int k = 0;
  while (k + 2 < n && window.knots[k + 1].time < tau) ++k;
  return k;
}

void build_normal_equations(const SlidingWindow& window,
                            const std::vector<LinearizedFactor>& factors,
                            Eigen::MatrixXd* a, Eigen::VectorXd* c) {
  const int n = static_cast<int>(window.knots.size());
  const int dim = n * kKnotDim;
  a->setZero(dim, dim);
  c->setZero(dim);

  if (window.prior.valid()) {
    const int m = static_cast<int>(window.prior.lin.size());
    Eigen::VectorXd d(m * kKnotDim);
    for (int i = 0; i < m; ++i)
      d.segment<kKnotDim>(i * kKnotDim) =
          knot_boxminus(window.knots[i], window.prior.lin[i]);
    a->topLeftCorner(m * kKnotDim, m * kKnotDim) += window.prior.a;
    c->head(m * kKnotDim) += window.prior.c - window.prior.a * d;
  }

  for (const auto& f : factors) {
    const Eigen::VectorXd we = f.info * f.error;
    for (const auto& bi : f.blocks) {
      if (bi.knot < 0 || bi.knot >= n)
        throw std::out_of_range("build_normal_equations: bad knot index");
      c->segment<kKnotDim>(bi.knot * kKnotDim) -= bi.jac.transpose() * we;
      for (const auto& bj : f.blocks) {
        a->block<kKnotDim, kKnotDim>(bi.knot * kKnotDim, bj.knot * kKnotDim) +=
            bi.jac.transpose() * f.info * bj.jac;
      }
    }
  }
}

bool gauss_newton_step(const Eigen::MatrixXd& a, const Eigen::VectorXd& c,
                       const SolverConfig& cfg, Eigen::VectorXd* dx) {
  auto try_solve = [&](const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return false;
    *dx = llt.solve(c);
    return dx->allFinite();
  };
  if (try_solve(a)) return true;
  double lambda = cfg.lm_lambda0;
  for (int i = 0; i < cfg.lm_max_retries; ++i) {
    Eigen::MatrixXd damped = a;
    damped.diagonal().array() += lambda;
    if (try_solve(damped)) return true;
    lambda *= cfg.lm_growth;
  }
  return false;
}

void update_window(SlidingWindow& window, const Eigen::VectorXd& dx) {
  for (size_t i = 0; i < window.knots.size(); ++i)
    knot_update(window.knots[i], dx.segment<kKnotDim>(i * kKnotDim));
}

void slide_and_marginalize(SlidingWindow& window,
                           const std::vector<LinearizedFactor>& factors,
                           int count) {
  const int n = static_cast<int>(window.knots.size());
  if (count <= 0 || count >= n)
    throw std::invalid_argument("slide_and_marginalize: bad count");

  Eigen::MatrixXd a;
  Eigen::VectorXd c;
  build_normal_equations(window, factors, &a, &c);

  const int d0 = count * kKnotDim;
  const int d1 = (n - count) * kKnotDim;
  Eigen::MatrixXd a00 = a.topLeftCorner(d0, d0);
  const Eigen::MatrixXd a10 = a.bottomLeftCorner(d1, d0);
  const Eigen::MatrixXd a11 = a.bottomRightCorner(d1, d1);
  const Eigen::VectorXd c0 = c.head(d0);
  const Eigen::VectorXd c1 = c.tail(d1);

  Eigen::LLT<Eigen::MatrixXd> llt(a00);
  if (llt.info() != Eigen::Success) {
    std::fprintf(stderr,
                 "slide_and_marginalize: singular departing block, "
                 "regularizing\n");
    a00.diagonal().array() += 1e-9;
    llt.compute(a00);
  }
  const Eigen::MatrixXd a00_inv_a01 = llt.solve(a10.transpose());
  const Eigen::VectorXd a00_inv_c0 = llt.solve(c0);

  MargPrior prior;
  prior.a = a11 - a10 * a00_inv_a01;
  prior.a = 0.5 * (prior.a + prior.a.transpose()).eval();
  prior.c = c1 - a10 * a00_inv_c0;
  for (int i = count; i < n; ++i) prior.lin.push_back(window.knots[i]);

  window.prior = std::move(prior);
  for (int i = 0; i < count; ++i) window.knots.pop_front();
}

Mat12 query_covariance(const SlidingWindow& window, const Eigen::MatrixXd& a,
                       double t) {
  const int n = static_cast<int>(window.knots.size());
  const Eigen::MatrixXd p = a.inverse();
  auto knot_block = [&](int i) {
    Mat12 b;
    b.topLeftCorner<6, 6>() = p.block<6, 6>(i * kKnotDim, i * kKnotDim);
    b.topRightCorner<6, 6>() = p.block<6, 6>(i * kKnotDim, i * kKnotDim + 6);
    b.bottomLeftCorner<6, 6>() =
        p.block<6, 6>(i * kKnotDim + 6, i * kKnotDim);
    b.bottomRightCorner<6, 6>() =
        p.block<6, 6>(i * kKnotDim + 6, i * kKnotDim + 6);
    return b;
  };
  for (int i = 0; i < n; ++i) {
    if (std::abs(window.knots[i].time - t) < 1e-12) return knot_block(i);
  }
  if (t <= window.knots.front().time) return knot_block(0);
  if (t >= window.knots.back().time) return knot_block(n - 1);

  const int k = bracket_interval(window, t);
  PriorHyperparams q;  // interpolation gain uses only ratios of dt, not q
  const auto ij = interp_jacobians(window.knots[k], window.knots[k + 1], t, q);
  const Eigen::Matrix<double, 12, 24> g = interp_gain(ij);
  Eigen::Matrix<double, 24, 24> pj;
  const int r0 = k * kKnotDim, r1 = (k + 1) * kKnotDim;
  const int offs[4] = {r0, r0 + 6, r1, r1 + 6};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      pj.block<6, 6>(6 * i, 6 * j) = p.block<6, 6>(offs[i], offs[j]);
  return g * pj * g.transpose();
}

LinearizedFactor linearize_motion_prior(const SlidingWindow& window, int k,
                                        const PriorHyperparams& q) {
  const TrajectoryKnot& k0 = window.knots[k];
  const TrajectoryKnot& k1 = window.knots[k + 1];
  MotionPriorJacobians mpj;
  LinearizedFactor f;
  f.error = motion_prior_error(k0, k1, &mpj);
  f.info = process_cov_inv(k1.time - k0.time, q);
  FactorBlock b0, b1;
  b0.knot = k;
  b1.knot = k + 1;
  b0.jac = Eigen::MatrixXd::Zero(12, kKnotDim);
  b1.jac = Eigen::MatrixXd::Zero(12, kKnotDim);
  b0.jac.leftCols<6>() = mpj.wrt_pose_k;
  b0.jac.middleCols<6>(6) = mpj.wrt_vel_k;
  b1.jac.leftCols<6>() = mpj.wrt_pose_k1;
  b1.jac.middleCols<6>(6) = mpj.wrt_vel_k1;
  f.blocks = {std::move(b0), std::move(b1)};
  return f;
}

LinearizedFactor linearize_bias_prior(const SlidingWindow& window, int k,
                                      const Vec6& qb_diag) {
  const TrajectoryKnot& k0 = window.knots[k];
  const TrajectoryKnot& k1 = window.knots[k + 1];
  LinearizedFactor f;
  f.error = bias_prior_error(k0.bias, k1.bias);
  f.info = bias_prior_cov(k1.time - k0.time, qb_diag).inverse();
  FactorBlock b0, b1;
  b0.knot = k;
  b1.knot = k + 1;
  b0.jac = Eigen::MatrixXd::Zero(6, kKnotDim);
  b1.jac = Eigen::MatrixXd::Zero(6, kKnotDim);
  b0.jac.rightCols<6>() = -Mat6::Identity();
  b1.jac.rightCols<6>() = Mat6::Identity();
  f.blocks = {std::move(b0), std::move(b1)};
  return f;
}

LinearizedFactor linearize_p2plane(const SlidingWindow& window,
                                   const QueryPoint& qp,
                                   const Correspondence& corr,
                                   const Extrinsics& ext,
                                   const PriorHyperparams& q, double meas_var,
                                   const RobustLoss& loss,
                                   InterpCache* cache) {
  const int k = bracket_interval(window, qp.time);
  const auto st = state_at(window, k, qp.time, q, cache);
  Eigen::Matrix<double, 1, 6> jac_pose;
  const double e = p2plane_error(qp, corr, st.pose, ext, &jac_pose);
  const double sigma = std::sqrt(meas_var);
  const double w = robust_weight(loss, e / sigma);
  LinearizedFactor f;
  f.error = Eigen::VectorXd::Constant(1, e);
  f.info = Eigen::MatrixXd::Constant(1, 1, w / meas_var);
  route_interp(window, k, jac_pose, Eigen::MatrixXd::Zero(1, 6), qp.time, q,
               &f, cache);
  return f;
}

LinearizedFactor linearize_p2p_radar(const SlidingWindow& window,
                                     const QueryPoint& qp,
                                     const Correspondence& corr,
                                     const Extrinsics& ext,
                                     const PriorHyperparams& q,
                                     double meas_var, const RobustLoss& loss,
                                     InterpCache* cache) {
  const int k = bracket_interval(window, qp.time);
  const auto st = state_at(window, k, qp.time, q, cache);
  Eigen::Matrix<double, 3, 6> jac_pose, jac_vel;
  const Vec3 e =
      p2p_radar_error(qp, corr, st.pose, st.velocity, ext, &jac_pose,
                      &jac_vel);
  const double sigma = std::sqrt(meas_var);
  const double w = robust_weight(loss, e.norm() / sigma);
  LinearizedFactor f;
  f.error = e;
  f.info = (w / meas_var) * Mat3::Identity();
  route_interp(window, k, jac_pose, jac_vel, qp.time, q, &f, cache);
  return f;
}

LinearizedFactor linearize_gyro(const SlidingWindow& window,
                                const ImuSample& sample,
                                const PriorHyperparams& q,
                                const Mat3& r_omega, InterpCache* cache) {
  const int k = bracket_interval(window, sample.time);
  const auto st = state_at(window, k, sample.time, q, cache);
  const Vec3 omega_phys = -st.velocity.tail<3>();
  const Vec3 b_omega = window.knots[k].bias.tail<3>();
  LinearizedFactor f;
  f.error = gyro_error(sample, omega_phys, b_omega);
  f.info = r_omega.inverse();
  // e = omega_tilde + varpi_ang(tau) - b_omega.
  Eigen::Matrix<double, 3, 6> jac_vel = Eigen::Matrix<double, 3, 6>::Zero();
  jac_vel.rightCols<3>() = Mat3::Identity();
  route_interp(window, k, Eigen::MatrixXd::Zero(3, 6), jac_vel, sample.time,
               q, &f, cache);
  FactorBlock bb;
  bb.knot = k;
  bb.jac = Eigen::MatrixXd::Zero(3, kKnotDim);
  bb.jac.middleCols<3>(15) = -Mat3::Identity();
  f.blocks.push_back(std::move(bb));
  return f;
}

LinearizedFactor linearize_preint(const SlidingWindow& window, int k,
                                  const std::vector<ImuSample>& samples,
                                  const Vec3& gravity_inertial,
                                  const PriorHyperparams& q,
                                  const Mat3& r_accel, bool mode_2d,
                                  InterpCache* cache) {
  if (samples.empty())
    throw std::invalid_argument("linearize_preint: no samples");
  const TrajectoryKnot& k1 = window.knots[k + 1];
  std::vector<Mat3> attitudes;
  attitudes.reserve(samples.size());
  for (const auto& s : samples)
    attitudes.push_back(state_at(window, k, s.time, q, cache).pose.C);
  const Vec3 b_a = window.knots[k].bias.head<3>();
  const auto pre = preintegrate_velocity(samples, attitudes, b_a,
                                         gravity_inertial, r_accel, k1.time,
                                         mode_2d);
  const double tau1 = samples.front().time;
  const auto st1 = state_at(window, k, tau1, q, cache);
  const Vec3 nu_k1 = -k1.velocity.head<3>();
  const Vec3 nu_tau1 = -st1.velocity.head<3>();

  LinearizedFactor f;
  f.error = accel_error(nu_k1, nu_tau1, pre.delta_nu);
  f.info = pre.cov.inverse();
  // -nu_tau1 = +varpi(tau1).head(3), interpolated.
  Eigen::Matrix<double, 3, 6> jac_vel = Eigen::Matrix<double, 3, 6>::Zero();
  jac_vel.leftCols<3>() = Mat3::Identity();
  route_interp(window, k, Eigen::MatrixXd::Zero(3, 6), jac_vel, tau1, q, &f,
               cache);
  // nu_k1 = -velocity_{k+1}.head(3), taken directly at the knot.
  FactorBlock bv;
  bv.knot = k + 1;
  bv.jac = Eigen::MatrixXd::Zero(3, kKnotDim);
  bv.jac.middleCols<3>(6) = -Mat3::Identity();
  f.blocks.push_back(std::move(bv));
  // d delta_nu / d b_a = -(t_end - tau1) I, e = ... - delta_nu.
  FactorBlock bb;
  bb.knot = k;
  bb.jac = Eigen::MatrixXd::Zero(3, kKnotDim);
  Mat3 d_ba = (k1.time - tau1) * Mat3::Identity();
  if (mode_2d) d_ba(2, 2) = 0.0;  // z accel dropped in 2D mode
  bb.jac.middleCols<3>(12) = d_ba;
  f.blocks.push_back(std::move(bb));
  return f;
}

LinearizedFactor linearize_pin(
    const SlidingWindow& window, int k, const TrajectoryKnot& target,
    const Eigen::Matrix<double, kKnotDim, 1>& info_diag) {
  LinearizedFactor f;
  f.error = knot_boxminus(window.knots[k], target);
  f.info = info_diag.asDiagonal();
  FactorBlock b;
  b.knot = k;
  b.jac = Eigen::MatrixXd::Identity(kKnotDim, kKnotDim);
  f.blocks = {std::move(b)};
  return f;
}

double total_cost(const std::vector<LinearizedFactor>& factors) {
  double j = 0.0;
  for (const auto& f : factors)
    j += 0.5 * f.error.dot(f.info * f.error);
  return j;
}

CvStepResult constant_velocity_step(
    const Pose& t_km2, const Pose& t_km1, double dt_prev, double t_km1_time,
    double t_k, const std::vector<QueryPoint>& points,
    const std::function<bool(const Vec3&, Correspondence*)>& match,
    const Extrinsics& ext, const RobustLoss& loss, double meas_var,
    int max_iterations) {
  CvStepResult res;
  res.varpi = se3_log(t_km1 * t_km2.inverse()) / dt_prev;
  res.t_k = se3_exp(((t_k - t_km1_time) * res.varpi).eval()) * t_km1;

  // Points deskewed into the vehicle frame at t_k by the fixed twist.
  std::vector<QueryPoint> deskewed;
  deskewed.reserve(points.size());
  for (const auto& qp : points) {
    QueryPoint d = qp;
    d.q = se3_exp(((t_k - qp.time) * res.varpi).eval()) * (ext.t_vs * qp.q);
    deskewed.push_back(d);
  }
  const Extrinsics ident{Pose(), 0.0};
  const double sigma = std::sqrt(meas_var);

  for (int it = 0; it < max_iterations; ++it) {
    Mat6 h = Mat6::Zero();
    Vec6 g = Vec6::Zero();
    const Pose t_iv = res.t_k.inverse();
    int used = 0;
    for (const auto& qp : deskewed) {
      Correspondence corr;
      if (!match(t_iv * qp.q, &corr)) continue;
      Eigen::Matrix<double, 1, 6> jac;
      const double e = p2plane_error(qp, corr, res.t_k, ident, &jac);
      const double w = robust_weight(loss, e / sigma) / meas_var;
      h += w * jac.transpose() * jac;
      g += w * jac.transpose() * e;
      ++used;
    }
    if (used < 6) break;
    h.diagonal().array() += 1e-9;
    const Vec6 dx = h.ldlt().solve((-g).eval());
    res.t_k = se3_exp(dx) * res.t_k;
    res.t_k.orthonormalize();
    res.iterations = it + 1;
    if (dx.norm() < 1e-8) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace ctodom
