#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcr/correspondence.hpp"
#include "gcr/pnp.hpp"
#include "gcr/rng.hpp"

namespace gcr {

class NoHypothesisError : public Error {
 public:
  NoHypothesisError() : Error("no hypothesis") {}
};

struct RansacConfig {
  int iterations = 50;
  int sample_size = 6;
  double inlier_threshold = 2.0;  // pixels
  double beta = 0.5;
  double tau = 10.0;
  std::uint64_t seed = 0;
  // The caller normally guarantees gate_sufficient (> 50 valid); tests on
  // tiny instances switch the check off.
  bool require_gate = true;
};

void validate(const RansacConfig& cfg);

struct RansacIterationTrace {
  int iteration = 0;
  std::vector<int> indices;  // valid-entry index space, sorted ascending
  bool solved = false;
  double score = 0.0;
  int inliers = 0;
};

/// Best hypothesis of a run. Carries the prior and (beta, tau) so the
/// score invariant score == inliers + beta*exp(-d_F(pose, prior)/tau) is
/// checkable from the result alone.
struct RansacResult {
  Pose pose;
  double score = 0.0;
  int inlier_count = 0;
  int iterations_run = 0;
  Pose prior;
  double beta = 0.0;
  double tau = 0.0;
  std::vector<RansacIterationTrace> trace;
};

/// Draws k distinct indices, each draw proportional to the remaining
/// weights (sequential, without replacement). Throws
/// Error("insufficient support") when fewer than k weights are positive.
std::vector<int> weighted_sample(const std::vector<double>& weights, int k,
                                 Rng& rng);

/// inliers + beta * exp(-pose_frobenius_distance(cand, reg) / tau)
double score_hypothesis(const Pose& p_candidate, int inlier_count,
                        const Pose& p_regression, double beta, double tau);

/// Weighted RANSAC with prior-guided scoring over the valid entries of cs.
/// weights and observed_pixels2 are aligned with the valid entries (in
/// entry order). Every iteration derives its own rng stream from
/// (cfg.seed, iteration), so parallel evaluation cannot change results;
/// minimal-set indices are sorted before solving so a subset always scores
/// identically no matter the draw order. Degenerate solves are skipped but
/// still count as iterations; score ties keep the earliest iteration.
RansacResult run_weighted_ransac(const CorrespondenceSet& cs,
                                 const std::vector<Pixel>& observed_pixels2,
                                 const std::vector<double>& weights,
                                 const Pose& p_reg,
                                 const CameraIntrinsics& k2,
                                 const RansacConfig& cfg);

/// Reference oracle: scores every size-sample_size subset through the same
/// evaluation path and returns the maximum. Requires <= 12 valid entries.
RansacResult exhaustive_ransac_oracle(const CorrespondenceSet& cs,
                                      const std::vector<Pixel>& observed_pixels2,
                                      const Pose& p_reg,
                                      const CameraIntrinsics& k2,
                                      const RansacConfig& cfg);

/// One JSON object per iteration: {"iter", "indices", "score", "inliers"}
/// (score/inliers null when the solve was skipped).
std::string trace_to_jsonl(const RansacResult& result);

}  // namespace gcr
