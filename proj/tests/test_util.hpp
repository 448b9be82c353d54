#pragma once

#include <random>

#include "ctodom/liegroup.hpp"

namespace ctodom::testutil {

inline Vec6 random_twist(std::mt19937& rng, double trans_scale,
                         double rot_scale) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec6 xi;
  for (int i = 0; i < 3; ++i) xi(i) = trans_scale * n(rng);
  for (int i = 3; i < 6; ++i) xi(i) = rot_scale * n(rng);
  return xi;
}

inline Vec3 random_vec3(std::mt19937& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  return Vec3(n(rng), n(rng), n(rng));
}

inline Pose random_pose(std::mt19937& rng, double trans_scale = 1.0,
                        double rot_scale = 0.5) {
  return se3_exp(random_twist(rng, trans_scale, rot_scale));
}

// Relative Frobenius distance, floored at 1 so small matrices are compared
// absolutely.
inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

// Truncated-series left Jacobian of SE(3): sum_n ad(xi)^n / (n+1)!.
inline Mat6 left_jacobian_series(const Vec6& xi, int terms = 30) {
  const Mat6 ad = curly_wedge(xi);
  Mat6 term = Mat6::Identity();
  Mat6 sum = Mat6::Identity();
  double fact = 1.0;
  for (int n = 1; n < terms; ++n) {
    term = term * ad;
    fact *= static_cast<double>(n + 1);
    sum += term / fact;
  }
  return sum;
}

}  // namespace ctodom::testutil
