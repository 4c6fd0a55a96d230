#include "gcr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gcr {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

Vec3 random_unit_vector(Rng& rng) {
  // Marsaglia: uniform on the sphere.
  while (true) {
    const double a = rng.uniform(-1.0, 1.0);
    const double b = rng.uniform(-1.0, 1.0);
    const double s = a * a + b * b;
    if (s >= 1.0 || s == 0.0) continue;
    const double r = 2.0 * std::sqrt(1.0 - s);
    return Vec3(a * r, b * r, 1.0 - 2.0 * s);
  }
}

CameraIntrinsics random_intrinsics(Rng& rng, const SceneConfig& cfg) {
  CameraIntrinsics k;
  k.width = int(rng.uniform_index(std::uint64_t(cfg.max_image - cfg.min_image + 1))) + cfg.min_image;
  k.height = int(rng.uniform_index(std::uint64_t(cfg.max_image - cfg.min_image + 1))) + cfg.min_image;
  k.fx = rng.uniform(cfg.min_f, cfg.max_f);
  k.fy = k.fx;
  k.cx = k.width * rng.uniform(0.45, 0.55);
  k.cy = k.height * rng.uniform(0.45, 0.55);
  return k;
}

// Depth of the plane (n, d) along the z-normalized ray of a pixel.
double ray_plane_depth(const CameraIntrinsics& k, const Vec3& n, double d,
                       const Pixel& px) {
  const Vec3 ray((px.u - k.cx) / k.fx, (px.v - k.cy) / k.fy, 1.0);
  const double denom = n.dot(ray);
  if (std::abs(denom) < 1e-12) throw Error("ray parallel to plane");
  return -d / denom;
}

bool corners_visible(const CameraIntrinsics& k, const Vec3& n, double d,
                     double lo, double hi) {
  const Pixel corners[4] = {Pixel{0, 0}, Pixel{double(k.width - 1), 0},
                            Pixel{0, double(k.height - 1)},
                            Pixel{double(k.width - 1), double(k.height - 1)}};
  for (const auto& c : corners) {
    const Vec3 ray((c.u - k.cx) / k.fx, (c.v - k.cy) / k.fy, 1.0);
    const double denom = n.dot(ray);
    if (std::abs(denom) < 1e-9) return false;
    const double depth = -d / denom;
    if (!(depth >= lo && depth <= hi)) return false;
  }
  return true;
}

struct CorruptRect {
  int x0, y0, x1, y1;
  bool contains(int x, int y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
};

std::vector<CorruptRect> corruption_rects(const Scene& s, int camera,
                                          const CameraIntrinsics& k) {
  std::vector<CorruptRect> rects;
  if (s.noise.descriptor_corruption_sigma <= 0.0) return rects;
  Rng rng(derive_seed(s.descriptor_seed, "corrupt-rects", std::uint64_t(camera)));
  for (int i = 0; i < 3; ++i) {
    const int w = std::max(1, int(k.width * rng.uniform(0.15, 0.35)));
    const int h = std::max(1, int(k.height * rng.uniform(0.15, 0.35)));
    const int x0 = int(rng.uniform_index(std::uint64_t(std::max(1, k.width - w))));
    const int y0 = int(rng.uniform_index(std::uint64_t(std::max(1, k.height - h))));
    rects.push_back(CorruptRect{x0, y0, x0 + w, y0 + h});
  }
  return rects;
}

}  // namespace

Scene make_scene(std::uint64_t seed, const SceneConfig& cfg) {
  if (cfg.rot_max_deg < 0.0 || cfg.rot_max_deg > 45.0)
    throw Error("scene config: rot_max_deg outside [0, 45]");
  if (cfg.baseline_max < 0.0 || cfg.baseline_max > 2.0)
    throw Error("scene config: baseline_max outside [0, 2]");
  if (!(cfg.depth_min > 0.0 && cfg.depth_max >= cfg.depth_min))
    throw Error("scene config: bad depth range");
  if (cfg.min_image < 16 || cfg.max_image < cfg.min_image)
    throw Error("scene config: bad image size range");

  Rng rng(derive_seed(seed, "scene"));
  // Corner-depth band keeps the plane well inside both frusta and the
  // descriptor fields smooth relative to pixel spacing.
  const double lo = 0.2 * cfg.depth_min;
  const double hi = 5.0 * cfg.depth_max;

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    Scene s;
    s.seed = seed;
    s.descriptor_seed = derive_seed(seed, "descriptor");
    s.descriptor_dim = cfg.descriptor_dim;
    s.descriptor_freq_scale = cfg.descriptor_freq_scale;
    s.noise = cfg.noise;
    s.k1 = random_intrinsics(rng, cfg);
    s.k2 = random_intrinsics(rng, cfg);

    if (cfg.rot_max_deg > 0.0) {
      const Vec3 axis = random_unit_vector(rng);
      const double angle = rng.uniform(0.0, cfg.rot_max_deg);
      s.gt_pose.rotation = rotation_about_axis(axis, angle);
    }
    if (cfg.baseline_max > 0.0) {
      s.gt_pose.translation =
          random_unit_vector(rng) * rng.uniform(0.0, cfg.baseline_max);
    }

    // Plane normal tilted away from -z by at most normal_tilt_max_deg,
    // offset so the depth at the cam-1 principal point hits the target.
    const double tilt = rng.uniform(0.0, cfg.normal_tilt_max_deg) * kPi / 180.0;
    const double az = rng.uniform(0.0, 2.0 * kPi);
    s.plane_normal = Vec3(std::sin(tilt) * std::cos(az),
                          std::sin(tilt) * std::sin(az), -std::cos(tilt));
    const double z0 = rng.uniform(cfg.depth_min, cfg.depth_max);
    // center ray is (0,0,1), so n.r = n_z
    s.plane_offset = -z0 * s.plane_normal.z();

    const auto [n2, d2] = plane_in_camera(s, 2);
    if (!corners_visible(s.k1, s.plane_normal, s.plane_offset, lo, hi)) continue;
    if (!corners_visible(s.k2, n2, d2, lo, hi)) continue;
    return s;
  }
  throw Error("scene visibility rejection exhausted");
}

std::pair<Vec3, double> plane_in_camera(const Scene& s, int camera) {
  if (camera == 1) return {s.plane_normal, s.plane_offset};
  if (camera != 2) throw Error("camera must be 1 or 2");
  const Vec3 n2 = s.gt_pose.rotation * s.plane_normal;
  const double d2 = s.plane_offset - n2.dot(s.gt_pose.translation);
  return {n2, d2};
}

double plane_depth_at(const Scene& s, int camera, const Pixel& px) {
  const auto [n, d] = plane_in_camera(s, camera);
  const CameraIntrinsics& k = camera == 1 ? s.k1 : s.k2;
  return ray_plane_depth(k, n, d, px);
}

Vec3 surface_point_cam1(const Scene& s, int camera, const Pixel& px) {
  const CameraIntrinsics& k = camera == 1 ? s.k1 : s.k2;
  const Vec3 x = unproject(k, px, plane_depth_at(s, camera, px));
  if (camera == 1) return x;
  return transform(inverse(s.gt_pose), x);
}

DescriptorFunction::DescriptorFunction(std::uint64_t seed, int dim,
                                       double freq_scale) {
  if (dim < 1) throw Error("descriptor dim must be >= 1");
  Rng rng(derive_seed(seed, "fourier-bank"));
  frequencies_.resize(dim, 3);
  phases_.resize(dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < 3; ++j) frequencies_(i, j) = freq_scale * rng.normal();
    phases_(i) = rng.uniform(0.0, 2.0 * kPi);
  }
}

VecX DescriptorFunction::evaluate(const Vec3& point_cam1) const {
  VecX v = (frequencies_ * point_cam1 + phases_).array().cos();
  const double n = v.norm();
  if (n < 1e-12) throw Error("degenerate descriptor");
  return v / n;
}

DepthMap render_depth(const Scene& s, int camera) {
  const CameraIntrinsics& k = camera == 1 ? s.k1 : s.k2;
  const auto [n, d] = plane_in_camera(s, camera);
  DepthMap dm;
  dm.width = k.width;
  dm.height = k.height;
  dm.values.resize(std::size_t(k.width) * k.height);
  dm.valid.assign(std::size_t(k.width) * k.height, 1);
  Rng noise_rng(derive_seed(s.seed, "depth-noise", std::uint64_t(camera)));
  const bool noisy = s.noise.depth_sigma > 0.0;
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      double depth = ray_plane_depth(k, n, d, Pixel{double(x), double(y)});
      if (noisy) depth *= 1.0 + s.noise.depth_sigma * noise_rng.normal();
      const std::size_t idx = std::size_t(y) * k.width + x;
      if (depth > 0.0 && std::isfinite(depth)) {
        dm.values[idx] = depth;
      } else {
        dm.values[idx] = 0.0;
        dm.valid[idx] = 0;
      }
    }
  }
  return dm;
}

DescriptorField render_descriptors(const Scene& s, int camera) {
  const CameraIntrinsics& k = camera == 1 ? s.k1 : s.k2;
  const DescriptorFunction fn(s.descriptor_seed, s.descriptor_dim,
                              s.descriptor_freq_scale);
  const auto rects = corruption_rects(s, camera, k);
  const double sigma = s.noise.descriptor_corruption_sigma;
  const double corrupt_conf = sigma > 0.0 ? std::exp(-sigma) : 1.0;

  DescriptorField f;
  f.width = k.width;
  f.height = k.height;
  f.dim = s.descriptor_dim;
  f.descriptors.resize(std::size_t(k.width) * k.height * s.descriptor_dim);
  f.confidence.assign(std::size_t(k.width) * k.height, 1.0);

  Rng noise_rng(derive_seed(s.descriptor_seed, "desc-noise", std::uint64_t(camera)));
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Vec3 p = surface_point_cam1(s, camera, Pixel{double(x), double(y)});
      VecX desc = fn.evaluate(p);
      bool corrupted = false;
      for (const auto& r : rects) corrupted = corrupted || r.contains(x, y);
      if (corrupted) {
        for (int c = 0; c < f.dim; ++c) desc(c) += sigma * noise_rng.normal();
        const double nn = desc.norm();
        if (nn < 1e-12) throw Error("degenerate descriptor");
        desc /= nn;
        f.confidence[std::size_t(y) * k.width + x] = corrupt_conf;
      }
      Eigen::Map<VecX>(f.descriptors.data() +
                           (std::size_t(y) * k.width + x) * f.dim,
                       f.dim) = desc;
    }
  }
  return f;
}

CorruptionResult corrupt_correspondences(const CorrespondenceSet& cs,
                                         const std::vector<Pixel>& observed,
                                         double outlier_fraction,
                                         double pixel_sigma, Rng& rng,
                                         const CameraIntrinsics& k2) {
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0))
    throw Error("outlier fraction must be in [0, 1)");
  if (observed.size() != cs.valid_count())
    throw Error("observed pixels not aligned with valid entries");

  const std::size_t n = observed.size();
  const std::size_t n_out = std::size_t(std::llround(outlier_fraction * double(n)));
  CorruptionResult out;
  out.pixels = observed;
  out.inlier_mask.assign(n, 1);

  // partial Fisher-Yates for the outlier subset
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t(0));
  for (std::size_t i = 0; i < n_out; ++i) {
    const std::size_t j = i + std::size_t(rng.uniform_index(n - i));
    std::swap(order[i], order[j]);
    out.inlier_mask[order[i]] = 0;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!out.inlier_mask[i]) {
      out.pixels[i].u = rng.uniform(0.0, double(k2.width));
      out.pixels[i].v = rng.uniform(0.0, double(k2.height));
    } else if (pixel_sigma > 0.0) {
      out.pixels[i].u += pixel_sigma * rng.normal();
      out.pixels[i].v += pixel_sigma * rng.normal();
    }
  }
  return out;
}

}  // namespace gcr
