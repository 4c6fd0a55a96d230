#pragma once

#include <algorithm>
#include <vector>

#include "gcr/correspondence.hpp"
#include "gcr/geometry.hpp"

namespace gcr {

struct PoseErrorSample {
  double rotation_deg = 0.0;
  double translation_deg = 0.0;
  double combined() const { return std::max(rotation_deg, translation_deg); }
};

PoseErrorSample pose_error(const Pose& estimate, const Pose& reference);

/// Pose accuracy AUC at an angular threshold, in percent. Closed form:
/// the mean over samples of max(0, threshold - min(e, threshold)) /
/// threshold, which equals (100/threshold) * integral of the empirical CDF
/// over [0, threshold] with no binning.
double auc_at(const std::vector<double>& errors, double threshold_deg);

/// Per-pixel descriptor disagreement under a pose, normalized to [0,1] as
/// (1 - cosine similarity) / 2.
struct ErrorMap {
  int width = 0, height = 0;
  std::vector<double> values;        // 0 where invalid
  std::vector<std::uint8_t> valid;
  double mean = 0.0;
  std::size_t valid_count = 0;
};

/// For every valid-depth pixel of view 1: unproject, transform by p,
/// project into view 2 and compare descriptors with a bilinear sample.
/// Pixels projecting behind the camera or out of support are invalid.
ErrorMap descriptor_error_map(const DescriptorField& f1,
                              const DescriptorField& f2,
                              const DepthMap& depth1,
                              const CameraIntrinsics& k1,
                              const CameraIntrinsics& k2, const Pose& p);

}  // namespace gcr
