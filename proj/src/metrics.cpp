#include "gcr/metrics.hpp"

#include <cmath>

#include "gcr/losses.hpp"

namespace gcr {

PoseErrorSample pose_error(const Pose& estimate, const Pose& reference) {
  PoseErrorSample s;
  s.rotation_deg = rotation_error_deg(estimate.rotation, reference.rotation);
  s.translation_deg = translation_direction_error_deg(estimate.translation,
                                                      reference.translation);
  return s;
}

double auc_at(const std::vector<double>& errors, double threshold_deg) {
  if (!(threshold_deg > 0.0)) throw Error("auc threshold must be positive");
  if (errors.empty()) throw Error("empty error list");
  double acc = 0.0;
  for (double e : errors) {
    if (!(e >= 0.0)) throw Error("errors must be non-negative");
    acc += (threshold_deg - std::min(e, threshold_deg)) / threshold_deg;
  }
  return 100.0 * acc / double(errors.size());
}

ErrorMap descriptor_error_map(const DescriptorField& f1,
                              const DescriptorField& f2,
                              const DepthMap& depth1,
                              const CameraIntrinsics& k1,
                              const CameraIntrinsics& k2, const Pose& p) {
  if (f1.width != depth1.width || f1.height != depth1.height)
    throw Error("descriptor field and depth map dimensions differ");
  if (f1.dim != f2.dim) throw Error("descriptor fields: dimension mismatch");

  ErrorMap map;
  map.width = f1.width;
  map.height = f1.height;
  map.values.assign(std::size_t(f1.width) * f1.height, 0.0);
  map.valid.assign(std::size_t(f1.width) * f1.height, 0);

  double sum = 0.0;
  for (int y = 0; y < f1.height; ++y) {
    for (int x = 0; x < f1.width; ++x) {
      if (!depth1.valid_at(x, y)) continue;
      const Vec3 x2 =
          transform(p, unproject(k1, Pixel{double(x), double(y)},
                                 depth1.at(x, y)));
      if (x2.z() <= 1e-9) continue;
      const Pixel proj{k2.fx * x2.x() / x2.z() + k2.cx,
                       k2.fy * x2.y() / x2.z() + k2.cy};
      if (!(proj.u >= 0.0 && proj.u <= double(f2.width - 1) &&
            proj.v >= 0.0 && proj.v <= double(f2.height - 1)))
        continue;
      const BilinearSample bs = bilinear_sample(f2, proj);
      const double sim = f1.descriptor_at(x, y).dot(bs.descriptor);
      const double err = std::clamp((1.0 - sim) / 2.0, 0.0, 1.0);
      const std::size_t idx = std::size_t(y) * f1.width + x;
      map.values[idx] = err;
      map.valid[idx] = 1;
      sum += err;
      ++map.valid_count;
    }
  }
  if (map.valid_count == 0) throw Error("no valid pixels");
  map.mean = sum / double(map.valid_count);
  return map;
}

}  // namespace gcr
