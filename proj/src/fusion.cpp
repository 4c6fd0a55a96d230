#include "gcr/fusion.hpp"

#include <cmath>

#include "gcr/rng.hpp"

namespace gcr {

namespace {

constexpr double kInitStd = 0.02;
constexpr double kLnEps = 1e-12;

void fill_normal(MatX& m, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = kInitStd * rng.normal();
}

void fill_normal(VecX& v, Rng& rng) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = kInitStd * rng.normal();
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

MatX layer_norm(const MatX& x, const VecX& gain, const VecX& bias) {
  MatX out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + kLnEps);
    out.row(r) = ((x.row(r).array() - mean) * inv) * gain.transpose().array() +
                 bias.transpose().array();
  }
  return out;
}

void softmax_rows_inplace(MatX& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

}  // namespace

void validate(const FusionConfig& cfg) {
  if (cfg.blocks < 1) throw Error("fusion config: blocks must be >= 1");
  if (cfg.model_dim < 1 || cfg.heads < 1 || cfg.model_dim % cfg.heads != 0)
    throw Error("fusion config: model_dim must be divisible by heads");
  if (cfg.input_dim < 1) throw Error("fusion config: input_dim must be >= 1");
}

FusionParams init_params(const FusionConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Rng rng(derive_seed(seed, "fusion-init"));
  const int d = cfg.model_dim;

  FusionParams p;
  p.config = cfg;
  p.input_w.resize(cfg.input_dim, d);
  fill_normal(p.input_w, rng);
  p.input_b = VecX::Zero(d);
  for (int b = 0; b < cfg.blocks; ++b) {
    FusionBlockParams blk;
    blk.ln1_gain = VecX::Ones(d);
    blk.ln1_bias = VecX::Zero(d);
    blk.ln2_gain = VecX::Ones(d);
    blk.ln2_bias = VecX::Zero(d);
    blk.wq.resize(d, d);
    blk.wk.resize(d, d);
    blk.wv.resize(d, d);
    blk.wo.resize(d, d);
    fill_normal(blk.wq, rng);
    fill_normal(blk.wk, rng);
    fill_normal(blk.wv, rng);
    fill_normal(blk.wo, rng);
    blk.bq = VecX::Zero(d);
    blk.bk = VecX::Zero(d);
    blk.bv = VecX::Zero(d);
    blk.bo = VecX::Zero(d);
    blk.ff1.resize(d, 4 * d);
    blk.ff2.resize(4 * d, d);
    fill_normal(blk.ff1, rng);
    fill_normal(blk.ff2, rng);
    blk.ff1_b = VecX::Zero(4 * d);
    blk.ff2_b = VecX::Zero(d);
    p.blocks.push_back(std::move(blk));
  }
  p.head_w1.resize(d, d);
  fill_normal(p.head_w1, rng);
  p.head_b1 = VecX::Zero(d);
  p.head_w2.resize(d);
  fill_normal(p.head_w2, rng);
  p.head_b2 = 0.0;
  return p;
}

std::vector<double> fusion_forward(const FusionParams& params,
                                   const MatX& embeddings) {
  const FusionConfig& cfg = params.config;
  validate(cfg);
  if (embeddings.cols() != cfg.input_dim)
    throw Error("fusion forward: embedding width mismatch");
  if (embeddings.rows() < 1) throw Error("fusion forward: empty input");

  const Eigen::Index n = embeddings.rows();
  const int d = cfg.model_dim;
  const int hd = d / cfg.heads;
  const double scale = 1.0 / std::sqrt(double(hd));

  MatX x = embeddings * params.input_w;
  x.rowwise() += params.input_b.transpose();

  for (const auto& blk : params.blocks) {
    // attention sublayer (pre-norm)
    MatX y = layer_norm(x, blk.ln1_gain, blk.ln1_bias);
    MatX q = y * blk.wq;
    q.rowwise() += blk.bq.transpose();
    MatX k = y * blk.wk;
    k.rowwise() += blk.bk.transpose();
    MatX v = y * blk.wv;
    v.rowwise() += blk.bv.transpose();
    MatX attended(n, d);
    for (int h = 0; h < cfg.heads; ++h) {
      MatX scores =
          q.middleCols(h * hd, hd) * k.middleCols(h * hd, hd).transpose() * scale;
      softmax_rows_inplace(scores);
      attended.middleCols(h * hd, hd) = scores * v.middleCols(h * hd, hd);
    }
    x += attended * blk.wo +
         MatX(VecX::Ones(n) * blk.bo.transpose());

    // feed-forward sublayer (pre-norm)
    MatX z = layer_norm(x, blk.ln2_gain, blk.ln2_bias) * blk.ff1;
    z.rowwise() += blk.ff1_b.transpose();
    z = z.unaryExpr([](double t) { return gelu(t); });
    x += (z * blk.ff2).rowwise() + blk.ff2_b.transpose();
  }

  // head MLP to one logit per row
  MatX h1 = x * params.head_w1;
  h1.rowwise() += params.head_b1.transpose();
  h1 = h1.unaryExpr([](double t) { return gelu(t); });
  VecX logits = h1 * params.head_w2;
  logits.array() += params.head_b2;

  const double mx = logits.maxCoeff();
  VecX w = (logits.array() - mx).exp();
  w /= w.sum();
  return std::vector<double>(w.data(), w.data() + w.size());
}

}  // namespace gcr
