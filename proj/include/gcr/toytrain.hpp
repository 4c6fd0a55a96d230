#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gcr/losses.hpp"
#include "gcr/synth.hpp"
#include "gcr/wransac.hpp"

namespace gcr {

enum class TrainMode { pose_only, pose_desc, full };

std::string to_string(TrainMode mode);                 // "pose_only", "pose+desc", "full"
TrainMode train_mode_from_string(const std::string&);

/// Low-parameter pose predictor: a linear map from 4 flow summary
/// features to a 13-value encoding (9D rotation + raw direction + raw
/// scale) added onto a fixed identity encoding. The 9D block goes through
/// svd_orthogonalize; translation is scale * soft-normalized direction
/// with the scale sigmoid-squashed into (0, s_max). Zero parameters give
/// the identity pose exactly.
struct ToyRegressor {
  static constexpr int kFeatureDim = 4;
  static constexpr int kOutputDim = 13;  // 9 + 3 + 1

  VecX params;  // kOutputDim x kFeatureDim, row-major
  double s_max = 4.0;

  static ToyRegressor identity_init(double s_max = 4.0);
};

/// Summary of the ground-truth pixel displacement field on the embedding
/// grid, in normalized camera coordinates: mean flow (2), curl-like and
/// divergence-like moments (rotation about the axis / approach).
struct SceneFeatures {
  Eigen::Vector4d values = Eigen::Vector4d::Zero();
};

SceneFeatures compute_scene_features(const Scene& scene,
                                     const DepthMap& depth1, int stride);

Pose toy_forward(const ToyRegressor& reg, const SceneFeatures& features);

/// Central finite differences, one coordinate at a time. Throws on a
/// non-finite objective value.
VecX fd_gradient(const std::function<double(const VecX&)>& objective,
                 const VecX& params, double h);

/// A scene with everything the trainer touches precomputed once.
struct SceneBundle {
  Scene scene;
  DepthMap depth1;
  DescriptorField f1, f2;
  SceneFeatures features;
};

SceneBundle make_bundle(const Scene& scene, int stride = 8);

struct TrainConfig {
  int steps = 300;
  double learning_rate = 2e-3;
  double fd_step = 1e-4;
  std::uint64_t seed = 0;
  LossWeights weights;
  TrainMode mode = TrainMode::full;
  int stride = 8;
  RansacConfig ransac;
  double s_max = 4.0;
  double divergence_limit = 1e6;
  int jobs = 1;
};

/// Per-step objective state of one scene, frozen at the step's base
/// prediction: the correspondence set, ground-truth observations for the
/// valid entries (NaN when the true projection leaves camera 2), sampling
/// weights, and the solver pose. Finite-difference probes vary only the
/// regression pose against this frozen state; the solver pose is a
/// constant target by the consistency-loss gradient contract.
struct SceneStepContext {
  CorrespondenceSet cs;
  std::vector<Pixel> observed;
  std::vector<double> weights;
  bool gated = false;  // consistency active: gate passed and solver succeeded
  Pose solver_pose;
};

SceneStepContext prepare_scene_step(const SceneBundle& bundle,
                                    const Pose& p_reg_base, TrainMode mode,
                                    const TrainConfig& cfg,
                                    std::uint64_t ransac_seed);

LossReport evaluate_step_losses(const SceneBundle& bundle,
                                const SceneStepContext& ctx, const Pose& p_reg,
                                TrainMode mode, const LossWeights& lw);

struct TrainHistoryRow {
  int step = 0;
  LossReport report;        // parts averaged over scenes
  double gated_fraction = 0.0;
};

struct TrainResult {
  ToyRegressor regressor;
  std::vector<TrainHistoryRow> history;
};

/// Plain gradient descent with finite-difference gradients. Within a step
/// the correspondences and solver pose are recomputed from the current
/// prediction, then held fixed over the probe evaluations; the RANSAC
/// stream is derived from (seed, step, scene) so the objective is
/// piecewise-deterministic. Aborts when the mean total exceeds
/// divergence_limit.
TrainResult train(const std::vector<SceneBundle>& scenes,
                  const TrainConfig& cfg);

/// max(rotation, translation-direction) error in degrees per scene.
std::vector<double> regressor_pose_errors(const ToyRegressor& reg,
                                          const std::vector<SceneBundle>& scenes);

/// "step,mode,pose_loss,consistency_loss,descriptor_loss,total,gated_fraction"
std::string history_csv(const std::vector<TrainHistoryRow>& history,
                        TrainMode mode);

}  // namespace gcr
