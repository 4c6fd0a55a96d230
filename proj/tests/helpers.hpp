#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "gcr/geometry.hpp"
#include "gcr/rng.hpp"

namespace gcr::test {

inline Vec3 random_unit(Rng& rng) {
  while (true) {
    Vec3 v(rng.normal(), rng.normal(), rng.normal());
    const double n = v.norm();
    if (n > 1e-6) return v / n;
  }
}

inline RotationMatrix random_rotation(Rng& rng, double max_angle_deg = 180.0) {
  return rotation_about_axis(random_unit(rng),
                             rng.uniform(0.0, max_angle_deg));
}

inline Pose random_pose(Rng& rng, double max_angle_deg = 45.0,
                        double max_baseline = 1.0) {
  Pose p;
  p.rotation = random_rotation(rng, max_angle_deg);
  p.translation = random_unit(rng) * rng.uniform(0.0, max_baseline);
  return p;
}

// Independent quaternion route for the rotation angle: convert both
// matrices with Shepperd's method, compose q1^-1 * q2, read the angle off
// the quaternion.
inline std::array<double, 4> quaternion_from_matrix(const Mat3& m) {
  std::array<double, 4> q{};  // w, x, y, z
  const double tr = m.trace();
  if (tr > 0.0) {
    double s = std::sqrt(tr + 1.0) * 2.0;
    q[0] = 0.25 * s;
    q[1] = (m(2, 1) - m(1, 2)) / s;
    q[2] = (m(0, 2) - m(2, 0)) / s;
    q[3] = (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
    double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
    q[0] = (m(2, 1) - m(1, 2)) / s;
    q[1] = 0.25 * s;
    q[2] = (m(0, 1) + m(1, 0)) / s;
    q[3] = (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1) > m(2, 2)) {
    double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
    q[0] = (m(0, 2) - m(2, 0)) / s;
    q[1] = (m(0, 1) + m(1, 0)) / s;
    q[2] = 0.25 * s;
    q[3] = (m(1, 2) + m(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
    q[0] = (m(1, 0) - m(0, 1)) / s;
    q[1] = (m(0, 2) + m(2, 0)) / s;
    q[2] = (m(1, 2) + m(2, 1)) / s;
    q[3] = 0.25 * s;
  }
  return q;
}

inline double quaternion_angle_deg(const Mat3& r1, const Mat3& r2) {
  const auto a = quaternion_from_matrix(r1);
  const auto b = quaternion_from_matrix(r2);
  // relative quaternion a^-1 * b (a is unit, conjugate inverts)
  const double w = a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
  const double x = a[0] * b[1] - a[1] * b[0] - a[2] * b[3] + a[3] * b[2];
  const double y = a[0] * b[2] + a[1] * b[3] - a[2] * b[0] - a[3] * b[1];
  const double z = a[0] * b[3] - a[1] * b[2] + a[2] * b[1] - a[3] * b[0];
  const double vec = std::sqrt(x * x + y * y + z * z);
  return 2.0 * std::atan2(vec, std::abs(w)) * 180.0 /
         3.141592653589793238462643383279502884;
}

inline Mat3 euler_zyz(double a, double b, double c) {
  return (Eigen::AngleAxisd(a, Vec3::UnitZ()) *
          Eigen::AngleAxisd(b, Vec3::UnitY()) *
          Eigen::AngleAxisd(c, Vec3::UnitZ()))
      .toRotationMatrix();
}

// Brute-force nearest-rotation search: full 6-degree ZYZ grid, then a 1-degree
// refinement box around the best cell. Returns the best rotation found.
inline Mat3 brute_force_nearest_rotation(const Mat3& target) {
  constexpr double deg = 3.141592653589793238462643383279502884 / 180.0;
  double best_dist = std::numeric_limits<double>::infinity();
  std::array<double, 3> best{};
  for (double a = 0; a < 360; a += 6)
    for (double b = 0; b <= 180; b += 6)
      for (double c = 0; c < 360; c += 6) {
        const Mat3 r = euler_zyz(a * deg, b * deg, c * deg);
        const double d = (r - target).squaredNorm();
        if (d < best_dist) {
          best_dist = d;
          best = {a, b, c};
        }
      }
  std::array<double, 3> refined = best;
  for (double a = best[0] - 6; a <= best[0] + 6; a += 1)
    for (double b = best[1] - 6; b <= best[1] + 6; b += 1)
      for (double c = best[2] - 6; c <= best[2] + 6; c += 1) {
        const Mat3 r = euler_zyz(a * deg, b * deg, c * deg);
        const double d = (r - target).squaredNorm();
        if (d < best_dist) {
          best_dist = d;
          refined = {a, b, c};
        }
      }
  return euler_zyz(refined[0] * deg, refined[1] * deg, refined[2] * deg);
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// One-sided sign test p-value: P[X >= wins] for X ~ Binomial(n, 1/2).
inline double sign_test_p(int wins, int n) {
  double p = 0.0;
  for (int k = wins; k <= n; ++k) {
    double logc = 0.0;
    for (int i = 0; i < k; ++i)
      logc += std::log(double(n - i)) - std::log(double(i + 1));
    p += std::exp(logc - n * std::log(2.0));
  }
  return p;
}

}  // namespace gcr::test
