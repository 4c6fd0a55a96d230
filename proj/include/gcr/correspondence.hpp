#pragma once

#include <cstdint>
#include <vector>

#include "gcr/geometry.hpp"

namespace gcr {

/// Per-pixel depth in meters; invalid pixels carry no usable value.
struct DepthMap {
  int width = 0, height = 0;
  std::vector<double> values;       // row-major, size width*height
  std::vector<std::uint8_t> valid;  // 1 = usable (positive, finite)

  double at(int x, int y) const { return values[std::size_t(y) * width + x]; }
  bool valid_at(int x, int y) const {
    return valid[std::size_t(y) * width + x] != 0;
  }
};

/// Per-pixel unit descriptors (dim components) plus confidence in [0,1].
/// Layout: descriptors[(y*width + x)*dim + c], confidence[y*width + x].
struct DescriptorField {
  int width = 0, height = 0, dim = 0;
  std::vector<double> descriptors;
  std::vector<double> confidence;

  Eigen::Map<const VecX> descriptor_at(int x, int y) const {
    return Eigen::Map<const VecX>(
        descriptors.data() + (std::size_t(y) * width + x) * dim, dim);
  }
  double confidence_at(int x, int y) const {
    return confidence[std::size_t(y) * width + x];
  }
};

/// Checks the DescriptorField invariants (unit descriptors to 1e-6,
/// confidences in [0,1]); throws on violation.
void validate(const DescriptorField& f);

/// One 3D-2D pair. grid_index is the position in sample_grid order and is
/// the alignment key to embedding rows: rows for excluded (invalid-depth)
/// pixels are dropped in tandem by selecting on grid_index.
struct Correspondence {
  int grid_index = -1;
  Vec3 p3d_cam1 = Vec3::Zero();
  Pixel pixel_cam1;
  Pixel pixel_cam2_projected;  // NaN when the transformed point is behind cam2
  bool valid = false;
};

struct CorrespondenceSet {
  int stride = 0;
  std::vector<Correspondence> entries;

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.valid ? 1 : 0;
    return n;
  }
};

/// Regular grid at cell centers: (i*stride + stride/2, j*stride + stride/2)
/// for all cells fully inside the image, row-major (x fastest). Integer
/// offset stride/2 keeps samples on pixel centers for direct map lookups.
std::vector<Pixel> sample_grid(int width, int height, int stride);

/// Unproject grid pixels with valid depth through k1, transform by p,
/// project into camera 2. Invalid-depth pixels are excluded entirely; an
/// included entry is valid iff the transformed z > 0 and the projection
/// lands in the continuous rectangle [0, W2) x [0, H2).
CorrespondenceSet form_correspondences(const DepthMap& depth1,
                                       const CameraIntrinsics& k1,
                                       const CameraIntrinsics& k2,
                                       const Pose& p, int stride);

/// N x 2D matrix: row i concatenates the two views' descriptors at grid
/// pixel i (same location in both views); order matches sample_grid.
struct EmbeddingSet {
  MatX rows;
};

EmbeddingSet build_embeddings(const DescriptorField& f1,
                              const DescriptorField& f2, int stride);

/// True iff strictly more than 50 entries are valid.
bool gate_sufficient(const CorrespondenceSet& cs);

}  // namespace gcr
