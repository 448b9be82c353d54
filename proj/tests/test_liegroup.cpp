#include <doctest.h>

#include <Eigen/Dense>

#include "ctodom/liegroup.hpp"
#include "test_util.hpp"

using namespace ctodom;
using namespace ctodom::testutil;

TEST_CASE("se3_exp identity and pure cases") {
  Pose T = se3_exp(Vec6::Zero());
  CHECK((T.C - Mat3::Identity()).norm() == doctest::Approx(0.0));
  CHECK(T.r.norm() == doctest::Approx(0.0));

  Vec6 xi = Vec6::Zero();
  xi(5) = M_PI / 2.0;
  T = se3_exp(xi);
  Mat3 expect;
  expect << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((T.C - expect).norm() < 1e-12);
  CHECK(T.r.norm() < 1e-12);

  xi.setZero();
  xi(0) = 1.0;
  T = se3_exp(xi);
  CHECK((T.C - Mat3::Identity()).norm() < 1e-15);
  CHECK((T.r - Vec3(1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("exp/log round trip") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Vec6 xi = random_twist(rng, 2.0, 1.0);
    const double max_angle = M_PI - 0.1;
    if (xi.tail<3>().norm() > max_angle)
      xi.tail<3>() *= (max_angle * u(rng)) / xi.tail<3>().norm();
    const Vec6 back = se3_log(se3_exp(xi));
    CHECK((back - xi).norm() < 1e-9);
  }
}

TEST_CASE("log at and near pi") {
  // Exactly 180 degrees about x.
  Mat3 C = so3_exp(Vec3(M_PI, 0, 0));
  Vec3 psi = so3_log(C);
  CHECK(std::abs(psi.norm() - M_PI) < 1e-9);
  CHECK((psi.cwiseAbs() - Vec3(M_PI, 0, 0)).norm() < 1e-9);
  // Round trip through the rotation, not the (sign-ambiguous) twist.
  CHECK((so3_exp(psi) - C).norm() < 1e-9);

  std::mt19937 rng(7);
  for (int i = 0; i < 100; ++i) {
    Vec3 axis = random_vec3(rng, 1.0).normalized();
    Mat3 Cn = so3_exp((M_PI - 1e-9) * axis);
    CHECK((so3_exp(so3_log(Cn)) - Cn).norm() < 1e-8);
  }
}

TEST_CASE("left jacobian matches series and inverse") {
  std::mt19937 rng(1);
  for (int i = 0; i < 200; ++i) {
    Vec6 xi = random_twist(rng, 1.0, 0.7);
    Mat6 J = left_jacobian(xi);
    CHECK(rel_err(J, left_jacobian_series(xi)) < 1e-12);
    CHECK(((J * left_jacobian_inv(xi)) - Mat6::Identity()).norm() < 1e-9);
  }
  CHECK((left_jacobian(Vec6::Zero()) - Mat6::Identity()).norm() == 0.0);
}

TEST_CASE("left jacobian inverse is d log d perturbation") {
  // d/deps ln(exp((xi + eps*delta)^))^vee at exp(xi) equals J^-1 delta when
  // the perturbation enters through group composition:
  // log(exp(eps*delta^) exp(xi^)) ~ xi + J^-1(xi) eps delta.
  std::mt19937 rng(3);
  for (int i = 0; i < 50; ++i) {
    Vec6 xi = random_twist(rng, 0.8, 0.6);
    Vec6 delta = random_twist(rng, 1.0, 1.0);
    const double h = 1e-6;
    Pose T = se3_exp(xi);
    Vec6 plus = se3_log(se3_exp((h * delta).eval()) * T);
    Vec6 minus = se3_log(se3_exp((-h * delta).eval()) * T);
    Vec6 fd = (plus - minus) / (2.0 * h);
    Vec6 analytic = left_jacobian_inv(xi) * delta;
    CHECK((fd - analytic).norm() < 1e-5 * std::max(1.0, analytic.norm()));
  }
}

TEST_CASE("adjoint is a homomorphism") {
  std::mt19937 rng(5);
  for (int i = 0; i < 50; ++i) {
    Pose A = random_pose(rng), B = random_pose(rng);
    CHECK(rel_err((A * B).adjoint(), A.adjoint() * B.adjoint()) < 1e-12);
  }
}

TEST_CASE("odot defining identity and operator linearity") {
  std::mt19937 rng(11);
  for (int i = 0; i < 100; ++i) {
    Vec6 xi = random_twist(rng, 2.0, 2.0);
    Vec4 p;
    p << random_vec3(rng, 3.0), 1.0;
    CHECK((wedge(xi) * p - odot(p) * xi).norm() < 1e-12);
    // vee undoes wedge
    CHECK((vee(wedge(xi)) - xi).norm() == 0.0);
  }
  Vec4 origin(0, 0, 0, 1);
  Mat46 od = odot(origin);
  CHECK((od.topLeftCorner<3, 3>() - Mat3::Identity()).norm() == 0.0);
  CHECK(od.topRightCorner<3, 3>().norm() == 0.0);
  CHECK(curly_wedge(Vec6::Zero()).norm() == 0.0);
}

TEST_CASE("orthonormalize repairs drifted rotations") {
  std::mt19937 rng(13);
  Pose T = random_pose(rng);
  T.C += 1e-4 * Mat3::Random();
  T.orthonormalize();
  CHECK((T.C.transpose() * T.C - Mat3::Identity()).norm() < 1e-12);
  CHECK(T.C.determinant() == doctest::Approx(1.0));
}
