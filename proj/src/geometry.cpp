#include "gcr/geometry.hpp"

#include <cmath>

namespace gcr {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kDegPerRad = 180.0 / kPi;
}  // namespace

RotationMatrix RotationMatrix::from_matrix(const Mat3& m) {
  if (!m.allFinite()) throw Error("rotation matrix not finite");
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  if (ortho > 1e-9) throw Error("rotation matrix not orthonormal");
  if (std::abs(m.determinant() - 1.0) > 1e-9)
    throw Error("rotation matrix determinant != +1");
  return RotationMatrix(m);
}

RotationMatrix rotation_about_axis(const Vec3& axis, double angle_deg) {
  const double n = axis.norm();
  if (n < 1e-15) throw Error("rotation axis is zero");
  const Eigen::AngleAxisd aa(angle_deg / kDegPerRad, axis / n);
  return RotationMatrix::from_matrix(aa.toRotationMatrix());
}

void validate(const CameraIntrinsics& k) {
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) throw Error("intrinsics: focal length must be positive");
  if (!(k.cx > 0.0 && k.cx < k.width)) throw Error("intrinsics: cx outside image");
  if (!(k.cy > 0.0 && k.cy < k.height)) throw Error("intrinsics: cy outside image");
}

RotationMatrix svd_orthogonalize(const Mat3& m9) {
  if (!m9.allFinite()) throw Error("rotation underdetermined");
  Eigen::JacobiSVD<Mat3> svd(m9, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sigma = svd.singularValues();
  // rank >= 2 required: with two vanishing singular values the nearest
  // rotation is not unique.
  if (sigma(1) < 1e-12) throw Error("rotation underdetermined");
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  const double d = (u * v.transpose()).determinant();
  Mat3 r = u * Vec3(1.0, 1.0, d < 0 ? -1.0 : 1.0).asDiagonal() * v.transpose();
  return RotationMatrix::from_matrix(r);
}

Pixel project(const CameraIntrinsics& k, const Vec3& p) {
  if (!(p.z() > 1e-9)) throw Error("behind camera");
  return Pixel{k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

Vec3 unproject(const CameraIntrinsics& k, const Pixel& px, double depth) {
  if (!(depth > 0.0)) throw Error("invalid depth");
  return Vec3((px.u - k.cx) / k.fx * depth, (px.v - k.cy) / k.fy * depth,
              depth);
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Pose inverse(const Pose& p) {
  Pose out;
  out.rotation = p.rotation.transposed();
  out.translation = -(out.rotation * p.translation);
  return out;
}

double rotation_error_deg(const RotationMatrix& r1, const RotationMatrix& r2) {
  const double tr = (r1.matrix().transpose() * r2.matrix()).trace();
  const double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * kDegPerRad;
}

double translation_direction_error_deg(const Vec3& t1, const Vec3& t2) {
  const double n1 = t1.norm();
  const double n2 = t2.norm();
  if (n1 < 1e-9 || n2 < 1e-9) return 0.0;  // degenerate baseline
  const double c = std::clamp(t1.dot(t2) / (n1 * n2), -1.0, 1.0);
  return std::acos(c) * kDegPerRad;
}

double pose_frobenius_distance(const Pose& p1, const Pose& p2) {
  Eigen::Matrix<double, 3, 4> a, b;
  a << p1.rotation.matrix(), p1.translation;
  b << p2.rotation.matrix(), p2.translation;
  return (a - b).norm();
}

}  // namespace gcr
