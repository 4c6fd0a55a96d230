#include "gcr/pnp.hpp"

#include <cmath>
#include <limits>

namespace gcr {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Mat3 rodrigues(const Vec3& omega) {
  const double angle = omega.norm();
  if (angle < 1e-15) return Mat3::Identity() + skew(omega);
  return Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
}

struct RigidFit {
  Mat3 rotation;
  Vec3 translation;
};

// Least-squares rigid transform mapping world points onto camera points.
RigidFit fit_rigid(const std::vector<Vec3>& world,
                   const std::vector<Vec3>& camera) {
  const double n = double(world.size());
  Vec3 wc = Vec3::Zero(), cc = Vec3::Zero();
  for (const auto& p : world) wc += p;
  for (const auto& p : camera) cc += p;
  wc /= n;
  cc /= n;
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < world.size(); ++i)
    h += (world[i] - wc) * (camera[i] - cc).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Mat3 r = v * u.transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = v * flip * u.transpose();
  }
  return RigidFit{r, cc - r * wc};
}

double sample_cost(const Mat3& r, const Vec3& t, const PnpSample& s) {
  double cost = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < s.points3d.size(); ++i) {
    const Vec3 x = r * s.points3d[i] + t;
    if (x.z() <= 1e-9) continue;
    const double u = s.intrinsics2.fx * x.x() / x.z() + s.intrinsics2.cx;
    const double v = s.intrinsics2.fy * x.y() / x.z() + s.intrinsics2.cy;
    const double du = u - s.pixels2d[i].u;
    const double dv = v - s.pixels2d[i].v;
    cost += du * du + dv * dv;
    ++used;
  }
  if (used == 0) return std::numeric_limits<double>::infinity();
  return cost;
}

}  // namespace

PnpSample make_pnp_sample(std::vector<Vec3> points3d,
                          std::vector<Pixel> pixels2d,
                          const CameraIntrinsics& intrinsics2) {
  if (points3d.size() != pixels2d.size())
    throw Error("pnp sample: list length mismatch");
  if (points3d.size() < 6) throw Error("pnp sample: fewer than 6 points");
  return PnpSample{std::move(points3d), std::move(pixels2d), intrinsics2};
}

Pose solve_pnp(const PnpSample& s) {
  const std::size_t n = s.points3d.size();
  if (n < 6) throw Error("pnp sample: fewer than 6 points");

  // Principal-axis control points; plane fallback keeps the barycentric
  // system well conditioned on coplanar sets.
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : s.points3d) centroid += p;
  centroid /= double(n);
  Mat3 cov = Mat3::Zero();
  for (const auto& p : s.points3d)
    cov += (p - centroid) * (p - centroid).transpose();
  cov /= double(n);
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 lambda = eig.eigenvalues();  // ascending
  if (!(lambda(2) > 0.0) || lambda(1) < 1e-10 * lambda(2))
    throw SolveError("degenerate sample");  // collinear or coincident
  const bool planar = lambda(0) < 1e-8 * lambda(2);
  const int m = planar ? 3 : 4;

  std::vector<Vec3> control(static_cast<std::size_t>(m), Vec3::Zero());
  control[0] = centroid;
  control[1] = centroid + std::sqrt(lambda(2)) * eig.eigenvectors().col(2);
  control[2] = centroid + std::sqrt(lambda(1)) * eig.eigenvectors().col(1);
  if (!planar)
    control[3] = centroid + std::sqrt(lambda(0)) * eig.eigenvectors().col(0);

  // Barycentric coordinates per point.
  MatX basis(3, m - 1);
  for (int j = 1; j < m; ++j) basis.col(j - 1) = control[std::size_t(j)] - control[0];
  Eigen::JacobiSVD<MatX> basis_svd(basis,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& bsv = basis_svd.singularValues();
  if (bsv(bsv.size() - 1) <= 0.0 || bsv(0) / bsv(bsv.size() - 1) > 1e10)
    throw SolveError("degenerate sample");  // control-point system
  MatX alphas(Eigen::Index(n), m);
  for (std::size_t i = 0; i < n; ++i) {
    const VecX q = basis_svd.solve(s.points3d[i] - control[0]);
    alphas(Eigen::Index(i), 0) = 1.0 - q.sum();
    for (int j = 1; j < m; ++j) alphas(Eigen::Index(i), j) = q(j - 1);
  }

  // Projection constraints on the camera-frame control points.
  const auto& k = s.intrinsics2;
  MatX mmat = MatX::Zero(Eigen::Index(2 * n), 3 * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double a = alphas(Eigen::Index(i), j);
      mmat(Eigen::Index(2 * i), 3 * j + 0) = a * k.fx;
      mmat(Eigen::Index(2 * i), 3 * j + 2) = a * (k.cx - s.pixels2d[i].u);
      mmat(Eigen::Index(2 * i + 1), 3 * j + 1) = a * k.fy;
      mmat(Eigen::Index(2 * i + 1), 3 * j + 2) = a * (k.cy - s.pixels2d[i].v);
    }
  }
  Eigen::JacobiSVD<MatX> msvd(mmat, Eigen::ComputeFullV);
  const VecX sv = msvd.singularValues();
  if (sv(3 * m - 2) < 1e-10 * sv(0))
    throw SolveError("degenerate sample");  // kernel dimension >= 2
  const VecX kernel = msvd.matrixV().col(3 * m - 1);

  // Scale the kernel so control-point distances match the world distances.
  double num = 0.0, den = 0.0;
  for (int j = 0; j < m; ++j) {
    for (int l = j + 1; l < m; ++l) {
      const double dv =
          (kernel.segment<3>(3 * j) - kernel.segment<3>(3 * l)).norm();
      const double dw = (control[std::size_t(j)] - control[std::size_t(l)]).norm();
      num += dv * dw;
      den += dv * dv;
    }
  }
  if (den < 1e-24) throw SolveError("degenerate sample");
  double beta = num / den;

  auto reconstruct = [&](double b, std::vector<Vec3>& cam_points) {
    cam_points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 x = Vec3::Zero();
      for (int j = 0; j < m; ++j)
        x += alphas(Eigen::Index(i), j) * b * kernel.segment<3>(3 * j);
      cam_points[i] = x;
    }
  };
  std::vector<Vec3> cam_points;
  reconstruct(beta, cam_points);
  double zsum = 0.0;
  for (const auto& x : cam_points) zsum += x.z();
  if (zsum < 0.0) {
    beta = -beta;
    reconstruct(beta, cam_points);
  }

  RigidFit fit = fit_rigid(s.points3d, cam_points);

  // Gauss-Newton on the sample reprojection error; keeps the best iterate.
  Mat3 r = fit.rotation;
  Vec3 t = fit.translation;
  Mat3 best_r = r;
  Vec3 best_t = t;
  double best_cost = sample_cost(r, t, s);
  for (int iter = 0; iter < 10; ++iter) {
    Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> jtr = Eigen::Matrix<double, 6, 1>::Zero();
    int used = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 x = r * s.points3d[i] + t;
      if (x.z() <= 1e-9) continue;
      const double iz = 1.0 / x.z();
      Eigen::Matrix<double, 2, 3> dpix;
      dpix << k.fx * iz, 0.0, -k.fx * x.x() * iz * iz, 0.0, k.fy * iz,
          -k.fy * x.y() * iz * iz;
      Eigen::Matrix<double, 2, 6> jac;
      jac.block<2, 3>(0, 0) = -dpix * skew(r * s.points3d[i]);
      jac.block<2, 3>(0, 3) = dpix;
      Vec2 res(k.fx * x.x() * iz + k.cx - s.pixels2d[i].u,
               k.fy * x.y() * iz + k.cy - s.pixels2d[i].v);
      jtj += jac.transpose() * jac;
      jtr += jac.transpose() * res;
      ++used;
    }
    if (used < 3) break;
    const Eigen::Matrix<double, 6, 1> delta = jtj.ldlt().solve(-jtr);
    if (!delta.allFinite()) break;
    r = rodrigues(delta.head<3>()) * r;
    t += delta.tail<3>();
    const double cost = sample_cost(r, t, s);
    if (cost < best_cost) {
      best_cost = cost;
      best_r = r;
      best_t = t;
    }
    if (delta.norm() < 1e-10) break;
  }

  Pose pose;
  pose.rotation = svd_orthogonalize(best_r);
  pose.translation = best_t;

  int in_front = 0;
  for (const auto& p : s.points3d)
    if (transform(pose, p).z() > 0.0) ++in_front;
  if (in_front == 0) throw SolveError("cheirality failure");
  return pose;
}

std::vector<double> reprojection_errors(const Pose& p,
                                        const CorrespondenceSet& cs,
                                        const std::vector<Pixel>& observed,
                                        const CameraIntrinsics& k2) {
  if (observed.size() != cs.valid_count())
    throw Error("observed pixels not aligned with valid entries");
  std::vector<double> errors;
  errors.reserve(observed.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::size_t oi = 0;
  for (const auto& e : cs.entries) {
    if (!e.valid) continue;
    const Pixel& obs = observed[oi++];
    const Vec3 x = transform(p, e.p3d_cam1);
    if (x.z() <= 1e-9 || !std::isfinite(obs.u) || !std::isfinite(obs.v)) {
      errors.push_back(inf);
      continue;
    }
    const Pixel proj{k2.fx * x.x() / x.z() + k2.cx,
                     k2.fy * x.y() / x.z() + k2.cy};
    errors.push_back(pixel_distance(proj, obs));
  }
  return errors;
}

int count_inliers(const std::vector<double>& errors, double threshold) {
  if (!(threshold > 0.0)) throw Error("inlier threshold must be positive");
  int n = 0;
  for (double e : errors)
    if (e < threshold) ++n;
  return n;
}

}  // namespace gcr
