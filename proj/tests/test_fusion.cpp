#include <doctest.h>

#include <filesystem>
#include <numeric>

#include "gcr/fusion.hpp"
#include "gcr/io.hpp"
#include "gcr/rng.hpp"
#include "helpers.hpp"

using namespace gcr;

namespace {

MatX random_embeddings(Rng& rng, int n, int dim) {
  MatX e(n, dim);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < dim; ++c) e(r, c) = rng.normal();
  return e;
}

double weight_sum(const std::vector<double>& w) {
  return std::accumulate(w.begin(), w.end(), 0.0);
}

}  // namespace

TEST_CASE("fusion_forward: singleton input gets weight 1") {
  FusionConfig cfg;
  const FusionParams params = init_params(cfg, 7);
  Rng rng(1);
  const auto w = fusion_forward(params, random_embeddings(rng, 1, cfg.input_dim));
  REQUIRE(w.size() == 1);
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fusion_forward: constant head output gives uniform weights") {
  FusionConfig cfg;
  FusionParams params = init_params(cfg, 8);
  params.head_w2.setZero();  // logits collapse to head_b2
  params.head_b2 = 0.7;
  Rng rng(2);
  const int n = 13;
  const auto w = fusion_forward(params, random_embeddings(rng, n, cfg.input_dim));
  for (double wi : w) CHECK(wi == doctest::Approx(1.0 / n).epsilon(1e-12));
}

TEST_CASE("fusion_forward: softmax normalization and positivity") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    FusionConfig cfg;
    const FusionParams params = init_params(cfg, 100 + trial);
    const int n = 1 + int(rng.uniform_index(64));
    const auto w = fusion_forward(params, random_embeddings(rng, n, cfg.input_dim));
    CHECK(weight_sum(w) == doctest::Approx(1.0).epsilon(1e-9));
    for (double wi : w) CHECK(wi > 0.0);
  }
}

TEST_CASE("fusion_forward: permutation equivariance") {
  Rng rng(4);
  FusionConfig cfg;
  const FusionParams params = init_params(cfg, 11);
  const int n = 17;
  const MatX e = random_embeddings(rng, n, cfg.input_dim);
  const auto w = fusion_forward(params, e);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[std::size_t(i)], perm[rng.uniform_index(std::uint64_t(i + 1))]);
  MatX pe(n, cfg.input_dim);
  for (int i = 0; i < n; ++i) pe.row(i) = e.row(perm[std::size_t(i)]);
  const auto pw = fusion_forward(params, pe);
  for (int i = 0; i < n; ++i)
    CHECK(pw[std::size_t(i)] ==
          doctest::Approx(w[std::size_t(perm[std::size_t(i)])]).epsilon(1e-9));
}

TEST_CASE("fusion_forward: attention mixes rows (context sensitivity)") {
  Rng rng(5);
  FusionConfig cfg;
  const FusionParams params = init_params(cfg, 12);
  const int n = 6;
  MatX e = random_embeddings(rng, n, cfg.input_dim);
  const auto base = fusion_forward(params, e);
  e.row(3).array() += 1.0;  // perturb one row
  const auto perturbed = fusion_forward(params, e);
  double other_change = 0.0;
  for (int i = 0; i < n; ++i)
    if (i != 3)
      other_change += std::abs(perturbed[std::size_t(i)] - base[std::size_t(i)]);
  CHECK(other_change > 1e-12);
}

TEST_CASE("init_params determinism and shape checks") {
  FusionConfig cfg;
  const FusionParams a = init_params(cfg, 55);
  const FusionParams b = init_params(cfg, 55);
  CHECK(a.input_w == b.input_w);
  CHECK(a.blocks[0].wq == b.blocks[0].wq);
  CHECK(a.head_w2 == b.head_w2);
  const FusionParams c = init_params(cfg, 56);
  CHECK(a.input_w != c.input_w);

  FusionConfig bad;
  bad.model_dim = 30;
  bad.heads = 4;
  CHECK_THROWS_AS(init_params(bad, 1), Error);
}

TEST_CASE("fusion_forward: shape mismatch rejected") {
  FusionConfig cfg;
  const FusionParams params = init_params(cfg, 9);
  Rng rng(6);
  CHECK_THROWS_AS(fusion_forward(params, random_embeddings(rng, 4, cfg.input_dim + 1)),
                  Error);
  CHECK_THROWS_AS(fusion_forward(params, MatX(0, cfg.input_dim)), Error);
}

TEST_CASE("fusion params save/load round trip") {
  FusionConfig cfg;
  cfg.blocks = 2;
  cfg.model_dim = 16;
  cfg.heads = 2;
  const FusionParams params = init_params(cfg, 77);
  const auto dir = std::filesystem::temp_directory_path() / "gcr_fusion_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "params.json";
  io::save_fusion_params(params, path);
  const FusionParams loaded = io::load_fusion_params(path);

  Rng rng(8);
  const MatX e = random_embeddings(rng, 9, cfg.input_dim);
  const auto w1 = fusion_forward(params, e);
  const auto w2 = fusion_forward(loaded, e);
  REQUIRE(w1.size() == w2.size());
  for (std::size_t i = 0; i < w1.size(); ++i) CHECK(w1[i] == w2[i]);
  std::filesystem::remove_all(dir);
}
