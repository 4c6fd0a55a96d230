#pragma once

#include <cstdint>
#include <vector>

#include "gcr/correspondence.hpp"
#include "gcr/geometry.hpp"

namespace gcr {

/// Correspondence-weighting transformer. Reference scale is 2 blocks,
/// hidden 768, 4 heads; the desk default (32/2) keeps finite-difference
/// sweeps over all parameters tractable.
struct FusionConfig {
  int blocks = 2;
  int model_dim = 32;
  int heads = 2;
  int input_dim = 48;  // 2 * descriptor dim
};

void validate(const FusionConfig& cfg);

struct FusionBlockParams {
  VecX ln1_gain, ln1_bias, ln2_gain, ln2_bias;
  MatX wq, wk, wv, wo;  // model_dim x model_dim
  VecX bq, bk, bv, bo;
  MatX ff1, ff2;  // model_dim x 4*model_dim, 4*model_dim x model_dim
  VecX ff1_b, ff2_b;
};

struct FusionParams {
  FusionConfig config;
  MatX input_w;  // input_dim x model_dim
  VecX input_b;
  std::vector<FusionBlockParams> blocks;
  MatX head_w1;  // model_dim x model_dim
  VecX head_b1;
  VecX head_w2;  // model_dim
  double head_b2 = 0.0;
};

/// Scaled-gaussian init (std 0.02 on projections, layer-norm gain 1 /
/// bias 0, other biases 0); deterministic per seed.
FusionParams init_params(const FusionConfig& cfg, std::uint64_t seed);

/// Input projection -> pre-norm blocks (multi-head self-attention over the
/// N rows + feed-forward, residuals) -> scalar head MLP -> softmax across
/// rows. Output sums to 1 and every entry is strictly positive. There is
/// no positional encoding, so the map is permutation-equivariant.
std::vector<double> fusion_forward(const FusionParams& params,
                                   const MatX& embeddings);

inline std::vector<double> fusion_forward(const FusionParams& params,
                                          const EmbeddingSet& e) {
  return fusion_forward(params, e.rows);
}

}  // namespace gcr
