#include "gcr/toytrain.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gcr/metrics.hpp"
#include "gcr/util.hpp"

namespace gcr {

namespace {

VecX identity_encoding() {
  VecX enc = VecX::Zero(ToyRegressor::kOutputDim);
  enc(0) = enc(4) = enc(8) = 1.0;  // row-major identity rotation
  return enc;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::pose_only: return "pose_only";
    case TrainMode::pose_desc: return "pose+desc";
    case TrainMode::full: return "full";
  }
  throw Error("unknown train mode");
}

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "pose_only") return TrainMode::pose_only;
  if (s == "pose+desc") return TrainMode::pose_desc;
  if (s == "full") return TrainMode::full;
  throw Error("unknown train mode: " + s);
}

ToyRegressor ToyRegressor::identity_init(double s_max) {
  ToyRegressor reg;
  reg.params = VecX::Zero(kOutputDim * kFeatureDim);
  reg.s_max = s_max;
  return reg;
}

SceneFeatures compute_scene_features(const Scene& scene,
                                     const DepthMap& depth1, int stride) {
  const auto grid = sample_grid(depth1.width, depth1.height, stride);
  double sum_dx = 0.0, sum_dy = 0.0, sum_curl = 0.0, sum_div = 0.0;
  double sum_r2 = 0.0;
  std::size_t n = 0;
  for (const auto& px : grid) {
    const int x = int(px.u);
    const int y = int(px.v);
    if (!depth1.valid_at(x, y)) continue;
    const Vec3 p = unproject(scene.k1, px, depth1.at(x, y));
    const Vec3 q = transform(scene.gt_pose, p);
    if (q.z() <= 1e-9) continue;
    const double ax = (px.u - scene.k1.cx) / scene.k1.fx;
    const double ay = (px.v - scene.k1.cy) / scene.k1.fy;
    const double bx = q.x() / q.z();
    const double by = q.y() / q.z();
    const double dx = bx - ax;
    const double dy = by - ay;
    sum_dx += dx;
    sum_dy += dy;
    sum_curl += ax * dy - ay * dx;
    sum_div += ax * dx + ay * dy;
    sum_r2 += ax * ax + ay * ay;
    ++n;
  }
  SceneFeatures f;
  if (n == 0) return f;
  const double inv_n = 1.0 / double(n);
  const double r2 = std::max(sum_r2 * inv_n, 1e-6);
  f.values(0) = sum_dx * inv_n;
  f.values(1) = sum_dy * inv_n;
  f.values(2) = sum_curl * inv_n / r2;
  f.values(3) = sum_div * inv_n / r2;
  return f;
}

Pose toy_forward(const ToyRegressor& reg, const SceneFeatures& features) {
  if (reg.params.size() != ToyRegressor::kOutputDim * ToyRegressor::kFeatureDim)
    throw Error("toy regressor: bad parameter count");
  VecX enc = identity_encoding();
  for (int r = 0; r < ToyRegressor::kOutputDim; ++r) {
    double acc = 0.0;
    for (int c = 0; c < ToyRegressor::kFeatureDim; ++c)
      acc += reg.params(r * ToyRegressor::kFeatureDim + c) * features.values(c);
    enc(r) += acc;
  }

  Mat3 raw9;
  raw9 << enc(0), enc(1), enc(2), enc(3), enc(4), enc(5), enc(6), enc(7), enc(8);
  Pose pose;
  pose.rotation = svd_orthogonalize(raw9);  // propagates "rotation underdetermined"

  const Vec3 raw_dir(enc(9), enc(10), enc(11));
  // Soft normalization: unit direction for large raw outputs, linear (and
  // differentiable) through zero, so zero parameters emit zero translation
  // and finite-difference probes never cross a normalization cusp.
  const Vec3 dir = raw_dir / std::sqrt(raw_dir.squaredNorm() + 1.0);
  const double scale = reg.s_max * sigmoid(enc(12));
  pose.translation = scale * dir;
  return pose;
}

VecX fd_gradient(const std::function<double(const VecX&)>& objective,
                 const VecX& params, double h) {
  if (!(h > 0.0)) throw Error("fd step must be positive");
  VecX grad(params.size());
  VecX probe = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    probe(i) = params(i) + h;
    const double fp = objective(probe);
    probe(i) = params(i) - h;
    const double fm = objective(probe);
    probe(i) = params(i);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw Error("non-finite objective");
    grad(i) = (fp - fm) / (2.0 * h);
  }
  return grad;
}

SceneBundle make_bundle(const Scene& scene, int stride) {
  SceneBundle b;
  b.scene = scene;
  b.depth1 = render_depth(scene, 1);
  b.f1 = render_descriptors(scene, 1);
  b.f2 = render_descriptors(scene, 2);
  b.features = compute_scene_features(scene, b.depth1, stride);
  return b;
}

SceneStepContext prepare_scene_step(const SceneBundle& bundle,
                                    const Pose& p_reg_base, TrainMode mode,
                                    const TrainConfig& cfg,
                                    std::uint64_t ransac_seed) {
  const Scene& scene = bundle.scene;
  SceneStepContext ctx;
  ctx.cs = form_correspondences(bundle.depth1, scene.k1, scene.k2, p_reg_base,
                                cfg.stride);

  // Ground-truth observations: where each 3D point actually appears in
  // camera 2. Entries whose true projection leaves the image cannot be
  // observed; they keep an entry (alignment) with zero sampling weight.
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& e : ctx.cs.entries) {
    if (!e.valid) continue;
    const Vec3 x = transform(scene.gt_pose, e.p3d_cam1);
    bool observable = x.z() > 1e-9;
    Pixel obs{nan, nan};
    if (observable) {
      obs = project(scene.k2, x);
      observable = obs.u >= 0.0 && obs.u < scene.k2.width && obs.v >= 0.0 &&
                   obs.v < scene.k2.height;
    }
    ctx.observed.push_back(observable ? obs : Pixel{nan, nan});
    ctx.weights.push_back(observable ? 1.0 : 0.0);
  }

  if (scene.noise.outlier_fraction > 0.0 || scene.noise.pixel_sigma > 0.0) {
    Rng rng(derive_seed(ransac_seed, "corrupt"));
    const auto corrupted = corrupt_correspondences(
        ctx.cs, ctx.observed, scene.noise.outlier_fraction,
        scene.noise.pixel_sigma, rng, scene.k2);
    for (std::size_t i = 0; i < ctx.observed.size(); ++i)
      if (ctx.weights[i] > 0.0) ctx.observed[i] = corrupted.pixels[i];
  }

  if (mode != TrainMode::full || !gate_sufficient(ctx.cs)) return ctx;
  std::size_t positives = 0;
  for (double w : ctx.weights) positives += w > 0.0 ? 1 : 0;
  if (int(positives) < cfg.ransac.sample_size) return ctx;

  RansacConfig rcfg = cfg.ransac;
  rcfg.seed = ransac_seed;
  rcfg.require_gate = true;
  try {
    const RansacResult res = run_weighted_ransac(
        ctx.cs, ctx.observed, ctx.weights, p_reg_base, scene.k2, rcfg);
    ctx.solver_pose = res.pose;
    ctx.gated = true;
  } catch (const NoHypothesisError&) {
    ctx.gated = false;
  }
  return ctx;
}

LossReport evaluate_step_losses(const SceneBundle& bundle,
                                const SceneStepContext& ctx, const Pose& p_reg,
                                TrainMode mode, const LossWeights& lw) {
  const double pose_part = pose_loss(p_reg, bundle.scene.gt_pose);
  double desc_part = 0.0;
  if (mode != TrainMode::pose_only) {
    try {
      desc_part = descriptor_loss(bundle.f1, bundle.f2, ctx.cs, p_reg,
                                  bundle.scene.k2);
    } catch (const Error&) {
      desc_part = 0.0;  // no projections in support: the term has no signal
    }
  }
  double cons_part = 0.0;
  const bool gated = mode == TrainMode::full && ctx.gated;
  if (gated) cons_part = consistency_loss(p_reg, ctx.solver_pose);
  return total_loss(pose_part, cons_part, desc_part, lw, gated);
}

TrainResult train(const std::vector<SceneBundle>& scenes,
                  const TrainConfig& cfg) {
  if (scenes.empty()) throw Error("train: no scenes");
  if (cfg.steps < 1) throw Error("train: steps must be >= 1");
  if (!(cfg.learning_rate >= 0.0)) throw Error("train: bad learning rate");

  TrainResult out;
  out.regressor = ToyRegressor::identity_init(cfg.s_max);
  out.history.reserve(std::size_t(cfg.steps));

  const std::size_t n = scenes.size();
  std::vector<LossReport> reports(n);
  std::vector<char> gated(n);
  std::vector<VecX> grads(n);

  for (int step = 0; step < cfg.steps; ++step) {
    const ToyRegressor& reg = out.regressor;
    parallel_for(n, cfg.jobs, [&](std::size_t s) {
      const Pose base = toy_forward(reg, scenes[s].features);
      const SceneStepContext ctx = prepare_scene_step(
          scenes[s], base, cfg.mode, cfg,
          derive_seed(cfg.seed, "ransac", std::uint64_t(step), std::uint64_t(s)));
      reports[s] = evaluate_step_losses(scenes[s], ctx, base, cfg.mode,
                                        cfg.weights);
      gated[s] = ctx.gated ? 1 : 0;
      auto objective = [&](const VecX& params) {
        ToyRegressor probe;
        probe.params = params;
        probe.s_max = reg.s_max;
        const Pose p = toy_forward(probe, scenes[s].features);
        return evaluate_step_losses(scenes[s], ctx, p, cfg.mode, cfg.weights)
            .total;
      };
      grads[s] = fd_gradient(objective, reg.params, cfg.fd_step);
    });

    TrainHistoryRow row;
    row.step = step;
    VecX grad = VecX::Zero(reg.params.size());
    for (std::size_t s = 0; s < n; ++s) {
      row.report.pose_loss += reports[s].pose_loss;
      row.report.consistency_loss += reports[s].consistency_loss;
      row.report.descriptor_loss += reports[s].descriptor_loss;
      row.report.total += reports[s].total;
      row.gated_fraction += gated[s] ? 1.0 : 0.0;
      grad += grads[s];
    }
    const double inv_n = 1.0 / double(n);
    row.report.pose_loss *= inv_n;
    row.report.consistency_loss *= inv_n;
    row.report.descriptor_loss *= inv_n;
    row.report.total *= inv_n;
    row.gated_fraction *= inv_n;
    row.report.consistency_applied = row.gated_fraction > 0.0;
    out.history.push_back(row);

    if (!std::isfinite(row.report.total) ||
        row.report.total > cfg.divergence_limit) {
      std::ostringstream msg;
      msg << "training diverged at step " << step
          << " (mean total = " << row.report.total << ")";
      throw Error(msg.str());
    }

    out.regressor.params -= cfg.learning_rate * inv_n * grad;
  }
  return out;
}

std::vector<double> regressor_pose_errors(
    const ToyRegressor& reg, const std::vector<SceneBundle>& scenes) {
  std::vector<double> errors;
  errors.reserve(scenes.size());
  for (const auto& b : scenes) {
    const Pose p = toy_forward(reg, b.features);
    errors.push_back(pose_error(p, b.scene.gt_pose).combined());
  }
  return errors;
}

std::string history_csv(const std::vector<TrainHistoryRow>& history,
                        TrainMode mode) {
  std::ostringstream out;
  out << "step,mode,pose_loss,consistency_loss,descriptor_loss,total,"
         "gated_fraction\n";
  for (const auto& row : history) {
    out << row.step << ',' << to_string(mode) << ','
        << format_g17(row.report.pose_loss) << ','
        << format_g17(row.report.consistency_loss) << ','
        << format_g17(row.report.descriptor_loss) << ','
        << format_g17(row.report.total) << ','
        << format_g17(row.gated_fraction) << '\n';
  }
  return out.str();
}

}  // namespace gcr
