#pragma once

#include <Eigen/Dense>

#include "gcr/common.hpp"

namespace gcr {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

/// Real-valued pixel position (u right, v down), origin at pixel (0,0).
struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

inline double pixel_distance(const Pixel& a, const Pixel& b) {
  const double du = a.u - b.u;
  const double dv = a.v - b.v;
  return std::sqrt(du * du + dv * dv);
}

/// Proper rotation matrix. Construction validates orthonormality and
/// det = +1 to 1e-9, so holders can rely on the invariant.
class RotationMatrix {
 public:
  static RotationMatrix from_matrix(const Mat3& m);
  static RotationMatrix identity() { return RotationMatrix(Mat3::Identity()); }

  const Mat3& matrix() const { return m_; }
  RotationMatrix transposed() const { return RotationMatrix(m_.transpose()); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  RotationMatrix operator*(const RotationMatrix& o) const {
    return RotationMatrix(m_ * o.m_);
  }

 private:
  explicit RotationMatrix(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

/// Axis-angle rotation helper (axis need not be unit; angle in degrees).
RotationMatrix rotation_about_axis(const Vec3& axis, double angle_deg);

/// Rigid transform cam1 -> cam2: x2 = R x1 + t. Translation in meters.
struct Pose {
  RotationMatrix rotation = RotationMatrix::identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return Pose{}; }
};

struct CameraIntrinsics {
  double fx = 0, fy = 0;  // focal lengths, pixels
  double cx = 0, cy = 0;  // principal point, pixels
  int width = 0, height = 0;
};

/// Throws if fx,fy <= 0 or the principal point is outside the image.
void validate(const CameraIntrinsics& k);

/// Projects an arbitrary 3x3 matrix to the nearest rotation (Frobenius):
/// SVD m = U S V^T, result U diag(1,1,det(UV^T)) V^T. Scale invariant and
/// idempotent. Throws Error("rotation underdetermined") when two singular
/// values fall below 1e-12.
RotationMatrix svd_orthogonalize(const Mat3& m9);

/// Pinhole projection; requires z > 1e-9 else throws "behind camera".
Pixel project(const CameraIntrinsics& k, const Vec3& p);

/// Inverse of project at a given depth (z-coordinate, meters); depth <= 0
/// throws "invalid depth".
Vec3 unproject(const CameraIntrinsics& k, const Pixel& px, double depth);

inline Vec3 transform(const Pose& p, const Vec3& x) {
  return p.rotation * x + p.translation;
}

/// compose(a, b) applies b first: (a o b)(x) = a(b(x)).
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

/// Geodesic angle between rotations, degrees in [0, 180].
double rotation_error_deg(const RotationMatrix& r1, const RotationMatrix& r2);

/// Angle between translation directions, degrees. Either vector with norm
/// below 1e-9 is a degenerate baseline and scores 0 by convention.
double translation_direction_error_deg(const Vec3& t1, const Vec3& t2);

/// Frobenius norm of the difference of the 3x4 [R | t] matrices. Mixes
/// unitless rotation entries with meters by design of the score it feeds.
double pose_frobenius_distance(const Pose& p1, const Pose& p2);

}  // namespace gcr
