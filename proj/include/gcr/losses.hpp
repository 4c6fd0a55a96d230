#pragma once

#include <string>

#include "gcr/correspondence.hpp"
#include "gcr/geometry.hpp"

namespace gcr {

struct LossWeights {
  double lambda_pose = 0.8;
  double lambda_consistency = 0.1;
  double lambda_desc = 0.1;
};

struct LossReport {
  double pose_loss = 0.0;
  double consistency_loss = 0.0;
  double descriptor_loss = 0.0;
  double total = 0.0;
  bool consistency_applied = false;
};

/// Angular disagreement between the regressed and solved poses: sum of the
/// rotation angle and the translation-direction angle, degrees. For
/// gradients the solver pose is a constant target; no derivative flows
/// into it.
double consistency_loss(const Pose& p_reg, const Pose& p_solver);

struct BilinearSample {
  VecX descriptor;  // renormalized to unit length
  double confidence = 0.0;
};

/// Bilinear interpolation over the 4 neighbors; support is the rectangle
/// [0, W-1] x [0, H-1], outside throws Error("outside field"). The
/// descriptor is renormalized, the confidence is not.
BilinearSample bilinear_sample(const DescriptorField& f, const Pixel& px);

/// Confidence-weighted negative cosine similarity between source
/// descriptors and descriptors sampled where p_reg projects each valid
/// correspondence. Weights are the product of the two views' confidences,
/// normalized over entries that stay inside camera 2's field support;
/// leaving entries drop out of sum and normalization alike.
double descriptor_loss(const DescriptorField& f1, const DescriptorField& f2,
                       const CorrespondenceSet& cs, const Pose& p_reg,
                       const CameraIntrinsics& k2);

/// Rotation angle + translation-direction angle (degrees) + absolute
/// translation-norm difference (meters). The scale term constrains the
/// predicted metric scale, which angles alone cannot.
double pose_loss(const Pose& p_reg, const Pose& p_gt);

/// Weighted sum of the three parts; the consistency term contributes 0
/// when not gated (the > 50 valid-correspondence gate).
LossReport total_loss(double pose_part, double consistency_part,
                      double descriptor_part, const LossWeights& lw,
                      bool gated);

/// "pose,consistency,descriptor,total,gated"
std::string loss_report_csv_row(const LossReport& r);

}  // namespace gcr
