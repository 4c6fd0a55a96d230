#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gcr/correspondence.hpp"
#include "gcr/geometry.hpp"
#include "gcr/rng.hpp"

namespace gcr {

struct NoiseSpec {
  double pixel_sigma = 0.0;
  double depth_sigma = 0.0;
  double outlier_fraction = 0.0;
  double descriptor_corruption_sigma = 0.0;
};

/// Synthetic ground truth: one plane {X : n.X + d = 0} in the cam-1 frame,
/// guaranteed visible (positive bounded depth at all four image corners)
/// from both cameras. All derived randomness (descriptors, noise) flows
/// from the stored seeds, so a serialized scene replays bit-identically.
struct Scene {
  CameraIntrinsics k1, k2;
  Pose gt_pose;  // cam1 -> cam2
  Vec3 plane_normal = Vec3::UnitZ();
  double plane_offset = -2.0;
  std::uint64_t seed = 0;
  std::uint64_t descriptor_seed = 0;
  int descriptor_dim = 24;
  double descriptor_freq_scale = 1.2;
  NoiseSpec noise;
};

struct SceneConfig {
  int min_image = 64, max_image = 256;
  double min_f = 80.0, max_f = 300.0;
  double rot_max_deg = 30.0;     // <= 45
  double baseline_max = 1.0;     // meters, <= 2
  double depth_min = 1.5, depth_max = 4.0;  // plane depth at image center
  double normal_tilt_max_deg = 30.0;
  int descriptor_dim = 24;
  double descriptor_freq_scale = 1.2;
  NoiseSpec noise;
  int max_attempts = 1000;
};

/// Rejection-samples intrinsics/pose/plane until the visibility invariant
/// holds; throws after config.max_attempts failures.
Scene make_scene(std::uint64_t seed, const SceneConfig& cfg);

/// Plane parameters expressed in the given camera's frame (camera 1 or 2).
std::pair<Vec3, double> plane_in_camera(const Scene& s, int camera);

/// Closed-form ray/plane depth (z-coordinate) at a continuous pixel.
double plane_depth_at(const Scene& s, int camera, const Pixel& px);

/// The surface point seen at a pixel, expressed in the cam-1 frame
/// regardless of which camera views it.
Vec3 surface_point_cam1(const Scene& s, int camera, const Pixel& px);

/// View-independent descriptor of a 3D point: unit-normalized random
/// Fourier features cos(F x + phi), deterministic per seed.
class DescriptorFunction {
 public:
  DescriptorFunction(std::uint64_t seed, int dim, double freq_scale);
  VecX evaluate(const Vec3& point_cam1) const;
  int dim() const { return int(phases_.size()); }

 private:
  MatX frequencies_;  // dim x 3
  VecX phases_;
};

DepthMap render_depth(const Scene& s, int camera);
DescriptorField render_descriptors(const Scene& s, int camera);

struct CorruptionResult {
  std::vector<Pixel> pixels;             // same length as input
  std::vector<std::uint8_t> inlier_mask; // 1 = inlier (gaussian noise only)
};

/// Contamination model for robustness tests: a round(fraction*N) subset is
/// replaced by uniform pixels inside camera 2's image, the rest gets
/// isotropic gaussian pixel noise. fraction must be in [0, 1).
CorruptionResult corrupt_correspondences(const CorrespondenceSet& cs,
                                         const std::vector<Pixel>& observed,
                                         double outlier_fraction,
                                         double pixel_sigma, Rng& rng,
                                         const CameraIntrinsics& k2);

}  // namespace gcr
