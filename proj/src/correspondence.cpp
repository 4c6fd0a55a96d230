#include "gcr/correspondence.hpp"

#include <cmath>
#include <limits>

namespace gcr {

void validate(const DescriptorField& f) {
  if (f.width <= 0 || f.height <= 0 || f.dim <= 0)
    throw Error("descriptor field: bad dimensions");
  const std::size_t n = std::size_t(f.width) * f.height;
  if (f.descriptors.size() != n * f.dim || f.confidence.size() != n)
    throw Error("descriptor field: storage size mismatch");
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      if (std::abs(f.descriptor_at(x, y).norm() - 1.0) > 1e-6)
        throw Error("descriptor field: descriptor not unit norm");
      const double c = f.confidence_at(x, y);
      if (!(c >= 0.0 && c <= 1.0))
        throw Error("descriptor field: confidence outside [0,1]");
    }
  }
}

std::vector<Pixel> sample_grid(int width, int height, int stride) {
  if (stride < 1) throw Error("stride must be >= 1");
  std::vector<Pixel> out;
  const int nx = width / stride;
  const int ny = height / stride;
  if (nx <= 0 || ny <= 0) return out;
  const int off = stride / 2;
  out.reserve(std::size_t(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      out.push_back(Pixel{double(i * stride + off), double(j * stride + off)});
  return out;
}

CorrespondenceSet form_correspondences(const DepthMap& depth1,
                                       const CameraIntrinsics& k1,
                                       const CameraIntrinsics& k2,
                                       const Pose& p, int stride) {
  if (depth1.width != k1.width || depth1.height != k1.height)
    throw Error("depth map dimensions do not match intrinsics");
  const auto grid = sample_grid(depth1.width, depth1.height, stride);
  CorrespondenceSet cs;
  cs.stride = stride;
  cs.entries.reserve(grid.size());
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const int x = int(grid[gi].u);
    const int y = int(grid[gi].v);
    if (!depth1.valid_at(x, y)) continue;  // excluded, not zero-filled
    Correspondence c;
    c.grid_index = int(gi);
    c.pixel_cam1 = grid[gi];
    c.p3d_cam1 = unproject(k1, grid[gi], depth1.at(x, y));
    const Vec3 x2 = transform(p, c.p3d_cam1);
    if (x2.z() > 1e-9) {
      c.pixel_cam2_projected = project(k2, x2);
      c.valid = c.pixel_cam2_projected.u >= 0.0 &&
                c.pixel_cam2_projected.u < k2.width &&
                c.pixel_cam2_projected.v >= 0.0 &&
                c.pixel_cam2_projected.v < k2.height;
    } else {
      c.pixel_cam2_projected = Pixel{nan, nan};
      c.valid = false;
    }
    cs.entries.push_back(c);
  }
  return cs;
}

EmbeddingSet build_embeddings(const DescriptorField& f1,
                              const DescriptorField& f2, int stride) {
  if (f1.width != f2.width || f1.height != f2.height || f1.dim != f2.dim)
    throw Error("descriptor fields: dimension mismatch");
  const auto grid = sample_grid(f1.width, f1.height, stride);
  EmbeddingSet e;
  e.rows.resize(Eigen::Index(grid.size()), 2 * f1.dim);
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const int x = int(grid[gi].u);
    const int y = int(grid[gi].v);
    e.rows.row(Eigen::Index(gi)).head(f1.dim) = f1.descriptor_at(x, y);
    e.rows.row(Eigen::Index(gi)).tail(f1.dim) = f2.descriptor_at(x, y);
  }
  return e;
}

bool gate_sufficient(const CorrespondenceSet& cs) {
  return cs.valid_count() > 50;
}

}  // namespace gcr
