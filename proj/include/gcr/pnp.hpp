#pragma once

#include <vector>

#include "gcr/correspondence.hpp"
#include "gcr/geometry.hpp"

namespace gcr {

/// Minimal-set PnP input: 3D points in the cam-1 frame with their observed
/// pixels in camera 2. Construct through make_pnp_sample to enforce the
/// size/alignment invariants (>= 6, equal lengths).
struct PnpSample {
  std::vector<Vec3> points3d;
  std::vector<Pixel> pixels2d;
  CameraIntrinsics intrinsics2;
};

PnpSample make_pnp_sample(std::vector<Vec3> points3d,
                          std::vector<Pixel> pixels2d,
                          const CameraIntrinsics& intrinsics2);

/// Control-point PnP (4 control points, 3 when the set is near-planar)
/// followed by a Gauss-Newton pass over the sample (max 10 iterations,
/// stop at update norm < 1e-10). Throws SolveError("degenerate sample")
/// on rank-deficient geometry and SolveError("cheirality failure") when
/// the best solution puts every sample point behind the camera.
Pose solve_pnp(const PnpSample& s);

/// Per-valid-entry distance between the pose's reprojection and the
/// observed pixel, in cs entry order. Entries whose transformed point has
/// z <= 0 (or whose observation is non-finite) get +infinity.
std::vector<double> reprojection_errors(const Pose& p,
                                        const CorrespondenceSet& cs,
                                        const std::vector<Pixel>& observed,
                                        const CameraIntrinsics& k2);

/// Count of errors strictly below the threshold.
int count_inliers(const std::vector<double>& errors, double threshold);

}  // namespace gcr
