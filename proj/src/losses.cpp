#include "gcr/losses.hpp"

#include <cmath>

#include "gcr/util.hpp"

namespace gcr {

namespace {

constexpr int kMaxDim = 256;

bool in_bilinear_support(const DescriptorField& f, double u, double v) {
  return u >= 0.0 && u <= double(f.width - 1) && v >= 0.0 &&
         v <= double(f.height - 1);
}

// Allocation-free bilinear core shared by the public sampler and the
// per-correspondence loss loop. Writes the unit descriptor into out[dim]
// and returns the interpolated confidence. Caller checks support.
double bilinear_raw(const DescriptorField& f, double u, double v,
                    double* out) {
  const int x0 = int(std::floor(u));
  const int y0 = int(std::floor(v));
  const int x1 = std::min(x0 + 1, f.width - 1);
  const int y1 = std::min(y0 + 1, f.height - 1);
  const double du = u - double(x0);
  const double dv = v - double(y0);
  const double w00 = (1.0 - du) * (1.0 - dv);
  const double w10 = du * (1.0 - dv);
  const double w01 = (1.0 - du) * dv;
  const double w11 = du * dv;

  const int dim = f.dim;
  const double* d00 = f.descriptors.data() + (std::size_t(y0) * f.width + x0) * dim;
  const double* d10 = f.descriptors.data() + (std::size_t(y0) * f.width + x1) * dim;
  const double* d01 = f.descriptors.data() + (std::size_t(y1) * f.width + x0) * dim;
  const double* d11 = f.descriptors.data() + (std::size_t(y1) * f.width + x1) * dim;
  double norm_sq = 0.0;
  for (int c = 0; c < dim; ++c) {
    const double val = w00 * d00[c] + w10 * d10[c] + w01 * d01[c] + w11 * d11[c];
    out[c] = val;
    norm_sq += val * val;
  }
  if (norm_sq < 1e-24) throw Error("degenerate interpolation");
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (int c = 0; c < dim; ++c) out[c] *= inv;

  const double* conf = f.confidence.data();
  return w00 * conf[std::size_t(y0) * f.width + x0] +
         w10 * conf[std::size_t(y0) * f.width + x1] +
         w01 * conf[std::size_t(y1) * f.width + x0] +
         w11 * conf[std::size_t(y1) * f.width + x1];
}

}  // namespace

double consistency_loss(const Pose& p_reg, const Pose& p_solver) {
  return rotation_error_deg(p_reg.rotation, p_solver.rotation) +
         translation_direction_error_deg(p_reg.translation,
                                         p_solver.translation);
}

BilinearSample bilinear_sample(const DescriptorField& f, const Pixel& px) {
  if (f.dim > kMaxDim) throw Error("descriptor dim too large");
  if (!in_bilinear_support(f, px.u, px.v)) throw Error("outside field");
  BilinearSample s;
  s.descriptor.resize(f.dim);
  s.confidence = bilinear_raw(f, px.u, px.v, s.descriptor.data());
  return s;
}

double descriptor_loss(const DescriptorField& f1, const DescriptorField& f2,
                       const CorrespondenceSet& cs, const Pose& p_reg,
                       const CameraIntrinsics& k2) {
  if (f1.dim != f2.dim) throw Error("descriptor fields: dimension mismatch");
  if (f1.dim > kMaxDim) throw Error("descriptor dim too large");

  double buf[kMaxDim];
  double weighted_sim = 0.0;
  double weight_sum = 0.0;
  for (const auto& e : cs.entries) {
    if (!e.valid) continue;
    const Vec3 x = transform(p_reg, e.p3d_cam1);
    if (x.z() <= 1e-9) continue;
    const double u = k2.fx * x.x() / x.z() + k2.cx;
    const double v = k2.fy * x.y() / x.z() + k2.cy;
    if (!in_bilinear_support(f2, u, v)) continue;  // dropped from sum and norm

    const int sx = int(e.pixel_cam1.u);
    const int sy = int(e.pixel_cam1.v);
    const double conf_proj = bilinear_raw(f2, u, v, buf);
    const auto d_src = f1.descriptor_at(sx, sy);
    double sim = 0.0;
    for (int c = 0; c < f1.dim; ++c) sim += d_src(c) * buf[c];
    const double w = f1.confidence_at(sx, sy) * conf_proj;
    weighted_sim += w * sim;
    weight_sum += w;
  }
  if (weight_sum <= 0.0) throw Error("no descriptor support");
  return -weighted_sim / weight_sum;
}

double pose_loss(const Pose& p_reg, const Pose& p_gt) {
  return rotation_error_deg(p_reg.rotation, p_gt.rotation) +
         translation_direction_error_deg(p_reg.translation, p_gt.translation) +
         std::abs(p_reg.translation.norm() - p_gt.translation.norm());
}

LossReport total_loss(double pose_part, double consistency_part,
                      double descriptor_part, const LossWeights& lw,
                      bool gated) {
  LossReport r;
  r.pose_loss = pose_part;
  r.consistency_loss = gated ? consistency_part : 0.0;
  r.descriptor_loss = descriptor_part;
  r.consistency_applied = gated;
  r.total = lw.lambda_pose * r.pose_loss +
            lw.lambda_consistency * r.consistency_loss +
            lw.lambda_desc * r.descriptor_loss;
  return r;
}

std::string loss_report_csv_row(const LossReport& r) {
  return format_g17(r.pose_loss) + "," + format_g17(r.consistency_loss) + "," +
         format_g17(r.descriptor_loss) + "," + format_g17(r.total) + "," +
         (r.consistency_applied ? "1" : "0");
}

}  // namespace gcr
