#include <doctest.h>

#include <algorithm>

#include "gcr/synth.hpp"
#include "gcr/wransac.hpp"
#include "helpers.hpp"

using namespace gcr;

namespace {

const CameraIntrinsics kCam{150, 150, 64, 64, 128, 128};

struct RansacProblem {
  Scene scene;
  CorrespondenceSet cs;
  std::vector<Pixel> observed;  // ground-truth projections per valid entry
};

RansacProblem make_ransac_problem(std::uint64_t seed) {
  SceneConfig cfg;
  cfg.min_image = 96;
  cfg.max_image = 160;
  cfg.rot_max_deg = 10.0;
  cfg.baseline_max = 0.3;
  RansacProblem p;
  p.scene = make_scene(seed, cfg);
  const DepthMap depth = render_depth(p.scene, 1);
  p.cs = form_correspondences(depth, p.scene.k1, p.scene.k2, p.scene.gt_pose, 8);
  for (const auto& e : p.cs.entries)
    if (e.valid) p.observed.push_back(e.pixel_cam2_projected);
  return p;
}

// n correspondences in general position observed under `pose` (+ noise).
struct TinyInstance {
  CorrespondenceSet cs;
  std::vector<Pixel> observed;
  Pose pose;
};

TinyInstance make_tiny_instance(std::uint64_t seed, int n, double noise_sigma) {
  Rng rng(derive_seed(seed, "tiny"));
  TinyInstance t;
  t.pose = test::random_pose(rng, 15.0, 0.3);
  while (int(t.cs.entries.size()) < n) {
    const Vec3 p(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                 rng.uniform(2.0, 4.0));
    const Vec3 q = transform(t.pose, p);
    if (q.z() < 0.2) continue;
    Correspondence c;
    c.grid_index = int(t.cs.entries.size());
    c.p3d_cam1 = p;
    c.valid = true;
    t.cs.entries.push_back(c);
    Pixel obs = project(kCam, q);
    obs.u += noise_sigma * rng.normal();
    obs.v += noise_sigma * rng.normal();
    t.observed.push_back(obs);
  }
  return t;
}

}  // namespace

TEST_CASE("weighted_sample: one-hot support forces the subset") {
  Rng rng(1);
  std::vector<double> w(10, 0.0);
  w[2] = w[5] = w[7] = 1.0;
  auto picked = weighted_sample(w, 3, rng);
  std::sort(picked.begin(), picked.end());
  CHECK(picked == std::vector<int>{2, 5, 7});
}

TEST_CASE("weighted_sample: uniform inclusion frequencies") {
  const int n = 8, k = 3, draws = 20000;
  Rng rng(42);
  std::vector<int> counts(n, 0);
  std::vector<double> w(n, 1.0 / n);
  for (int d = 0; d < draws; ++d)
    for (int idx : weighted_sample(w, k, rng)) ++counts[std::size_t(idx)];
  const double expect = double(draws) * k / n;
  const double sigma = std::sqrt(draws * (double(k) / n) * (1.0 - double(k) / n));
  for (int c : counts) CHECK(std::abs(c - expect) <= 3.0 * sigma);
}

TEST_CASE("weighted_sample: skewed single draw frequencies") {
  const int draws = 20000;
  Rng rng(43);
  std::vector<double> w = {0.9, 0.05, 0.05};
  int zero = 0;
  for (int d = 0; d < draws; ++d)
    zero += weighted_sample(w, 1, rng)[0] == 0 ? 1 : 0;
  const double sigma = std::sqrt(draws * 0.9 * 0.1);
  CHECK(std::abs(zero - 0.9 * draws) <= 3.0 * sigma);
}

TEST_CASE("weighted_sample: errors") {
  Rng rng(2);
  std::vector<double> w = {1.0, 0.0, 1.0};
  CHECK_THROWS_WITH_AS(weighted_sample(w, 3, rng), "insufficient support",
                       Error);
  std::vector<double> neg = {1.0, -0.1, 1.0};
  CHECK_THROWS_AS(weighted_sample(neg, 2, rng), Error);
}

TEST_CASE("score_hypothesis") {
  Rng rng(3);
  const Pose p = test::random_pose(rng);
  CHECK(score_hypothesis(p, 10, p, 0.5, 10.0) == doctest::Approx(10.5));
  const Pose q = test::random_pose(rng);
  CHECK(score_hypothesis(q, 7, p, 0.0, 10.0) == doctest::Approx(7.0));

  double prev = score_hypothesis(p, 5, p, 0.5, 10.0);
  for (double step : {0.1, 0.5, 1.0, 2.0}) {
    Pose moved = p;
    moved.translation += Vec3(step, 0, 0);
    const double s = score_hypothesis(moved, 5, p, 0.5, 10.0);
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("run_weighted_ransac: exact recovery on a noise-free scene") {
  const RansacProblem prob = make_ransac_problem(11);
  REQUIRE(gate_sufficient(prob.cs));
  std::vector<double> weights(prob.observed.size(), 1.0);
  RansacConfig cfg;
  cfg.seed = 5;
  const RansacResult res = run_weighted_ransac(
      prob.cs, prob.observed, weights, prob.scene.gt_pose, prob.scene.k2, cfg);
  CHECK(rotation_error_deg(res.pose.rotation, prob.scene.gt_pose.rotation) <
        1e-4);
  CHECK((res.pose.translation - prob.scene.gt_pose.translation).norm() < 1e-6);
  CHECK(res.inlier_count == int(prob.observed.size()));
  CHECK(res.iterations_run == 50);
  CHECK(res.trace.size() == 50);
  // score invariant recomputed from the result's own fields
  CHECK(res.score == doctest::Approx(score_hypothesis(res.pose, res.inlier_count,
                                                      res.prior, res.beta,
                                                      res.tau))
                         .epsilon(1e-12));
}

TEST_CASE("run_weighted_ransac: inlier-concentrated weights defeat outliers") {
  const RansacProblem prob = make_ransac_problem(13);
  Rng rng(777);
  const auto corrupted = corrupt_correspondences(prob.cs, prob.observed, 0.3,
                                                 0.0, rng, prob.scene.k2);
  std::vector<double> weights(corrupted.pixels.size());
  for (std::size_t i = 0; i < weights.size(); ++i)
    weights[i] = corrupted.inlier_mask[i] ? 1.0 : 0.0;
  RansacConfig cfg;
  cfg.seed = 6;
  const RansacResult res =
      run_weighted_ransac(prob.cs, corrupted.pixels, weights,
                          prob.scene.gt_pose, prob.scene.k2, cfg);
  CHECK(rotation_error_deg(res.pose.rotation, prob.scene.gt_pose.rotation) <
        1e-4);
  CHECK((res.pose.translation - prob.scene.gt_pose.translation).norm() < 1e-6);
  // every sampled index must be a true inlier
  for (const auto& tr : res.trace)
    for (int idx : tr.indices) CHECK(corrupted.inlier_mask[std::size_t(idx)] == 1);
}

TEST_CASE("run_weighted_ransac matches the exhaustive oracle on tiny instances") {
  int argmax_visited = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TinyInstance t = make_tiny_instance(seed, 8, 1.0);
    std::vector<double> weights(8, 1.0);
    RansacConfig cfg;
    cfg.iterations = 200;
    cfg.seed = seed;
    cfg.require_gate = false;
    const RansacResult run = run_weighted_ransac(t.cs, t.observed, weights,
                                                 t.pose, kCam, cfg);
    const RansacResult oracle =
        exhaustive_ransac_oracle(t.cs, t.observed, t.pose, kCam, cfg);
    CHECK(oracle.trace.size() == 28);  // C(8,6)
    CHECK(run.score <= oracle.score + 1e-9);

    // find the oracle's argmax subset and check whether the run saw it
    const RansacIterationTrace* best = nullptr;
    for (const auto& tr : oracle.trace)
      if (tr.solved && (!best || tr.score > best->score)) best = &tr;
    REQUIRE(best != nullptr);
    bool visited = false;
    for (const auto& tr : run.trace) visited = visited || tr.indices == best->indices;
    if (visited) {
      ++argmax_visited;
      CHECK(run.score == doctest::Approx(oracle.score).epsilon(1e-12));
    }
  }
  CHECK(argmax_visited >= 19);  // 200 iterations over 28 subsets
}

TEST_CASE("exhaustive oracle: exactly one subset at n == sample_size") {
  const TinyInstance t = make_tiny_instance(3, 6, 0.0);
  RansacConfig cfg;
  cfg.require_gate = false;
  const RansacResult res = exhaustive_ransac_oracle(t.cs, t.observed, t.pose,
                                                    kCam, cfg);
  CHECK(res.trace.size() == 1);
  CHECK(res.iterations_run == 1);
}

TEST_CASE("exhaustive oracle: bound and degenerate cases") {
  RansacConfig cfg;
  cfg.require_gate = false;

  SUBCASE("more than 12 valid entries rejected") {
    const TinyInstance t = make_tiny_instance(4, 13, 0.0);
    CHECK_THROWS_WITH_AS(
        exhaustive_ransac_oracle(t.cs, t.observed, t.pose, kCam, cfg),
        "oracle bound exceeded", Error);
  }
  SUBCASE("all-degenerate subsets yield no hypothesis") {
    CorrespondenceSet cs;
    std::vector<Pixel> obs;
    for (int i = 0; i < 7; ++i) {  // collinear points
      Correspondence c;
      c.grid_index = i;
      c.p3d_cam1 = Vec3(0.1 * i, 0.05 * i, 2.0 + 0.1 * i);
      c.valid = true;
      cs.entries.push_back(c);
      obs.push_back(project(kCam, c.p3d_cam1));
    }
    CHECK_THROWS_AS(
        exhaustive_ransac_oracle(cs, obs, Pose::identity(), kCam, cfg),
        NoHypothesisError);
  }
}

TEST_CASE("prior pull: ties in inlier count resolve toward the prior") {
  Rng rng(909);
  const Pose pose_a = test::random_pose(rng, 15.0, 0.3);
  Pose pose_b = pose_a;
  pose_b.rotation = rotation_about_axis(Vec3(0.3, 1.0, 0.2), 25.0) * pose_b.rotation;
  pose_b.translation += Vec3(0.4, -0.2, 0.1);

  CorrespondenceSet cs;
  std::vector<Pixel> obs;
  auto add_points = [&](const Pose& pose) {
    int added = 0;
    while (added < 6) {
      const Vec3 p(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                   rng.uniform(2.0, 4.0));
      const Vec3 q = transform(pose, p);
      if (q.z() < 0.2) continue;
      Correspondence c;
      c.grid_index = int(cs.entries.size());
      c.p3d_cam1 = p;
      c.valid = true;
      cs.entries.push_back(c);
      obs.push_back(project(kCam, q));
      ++added;
    }
  };
  add_points(pose_a);
  add_points(pose_b);

  RansacConfig cfg;
  cfg.require_gate = false;

  // the exhaustive oracle sees both pure subsets; ties go to the prior side
  const RansacResult toward_a =
      exhaustive_ransac_oracle(cs, obs, pose_a, kCam, cfg);
  CHECK(toward_a.inlier_count == 6);
  CHECK(rotation_error_deg(toward_a.pose.rotation, pose_a.rotation) < 1e-4);
  const RansacResult toward_b =
      exhaustive_ransac_oracle(cs, obs, pose_b, kCam, cfg);
  CHECK(toward_b.inlier_count == 6);
  CHECK(rotation_error_deg(toward_b.pose.rotation, pose_b.rotation) < 1e-4);

  // and the sampled loop agrees once its trace covers both pure subsets
  RansacConfig live = cfg;
  live.iterations = 4000;
  live.seed = 2024;
  std::vector<double> weights(12, 1.0);
  const RansacResult run =
      run_weighted_ransac(cs, obs, weights, pose_a, kCam, live);
  const std::vector<int> pure_a = {0, 1, 2, 3, 4, 5};
  const std::vector<int> pure_b = {6, 7, 8, 9, 10, 11};
  bool saw_a = false, saw_b = false;
  for (const auto& tr : run.trace) {
    saw_a = saw_a || tr.indices == pure_a;
    saw_b = saw_b || tr.indices == pure_b;
  }
  REQUIRE(saw_a);
  REQUIRE(saw_b);
  CHECK(rotation_error_deg(run.pose.rotation, pose_a.rotation) < 1e-4);
}

TEST_CASE("run_weighted_ransac determinism: identical inputs and seed") {
  const RansacProblem prob = make_ransac_problem(17);
  std::vector<double> weights(prob.observed.size(), 1.0);
  RansacConfig cfg;
  cfg.seed = 99;
  const RansacResult a = run_weighted_ransac(prob.cs, prob.observed, weights,
                                             prob.scene.gt_pose, prob.scene.k2,
                                             cfg);
  const RansacResult b = run_weighted_ransac(prob.cs, prob.observed, weights,
                                             prob.scene.gt_pose, prob.scene.k2,
                                             cfg);
  CHECK((a.pose.rotation.matrix() - b.pose.rotation.matrix()).norm() == 0.0);
  CHECK((a.pose.translation - b.pose.translation).norm() == 0.0);
  CHECK(a.score == b.score);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].indices == b.trace[i].indices);
    CHECK(a.trace[i].solved == b.trace[i].solved);
    if (a.trace[i].solved) CHECK(a.trace[i].score == b.trace[i].score);
  }
  CHECK(trace_to_jsonl(a) == trace_to_jsonl(b));
}

TEST_CASE("run_weighted_ransac error paths") {
  RansacConfig cfg;

  SUBCASE("gate enforced by default") {
    const TinyInstance t = make_tiny_instance(5, 8, 0.0);
    std::vector<double> weights(8, 1.0);
    CHECK_THROWS_WITH_AS(
        run_weighted_ransac(t.cs, t.observed, weights, t.pose, kCam, cfg),
        "insufficient support", Error);
  }
  SUBCASE("no hypothesis when every sample is degenerate") {
    CorrespondenceSet cs;
    std::vector<Pixel> obs;
    for (int i = 0; i < 8; ++i) {
      Correspondence c;
      c.grid_index = i;
      c.p3d_cam1 = Vec3(0.1 * i, 0.0, 2.0);  // collinear
      c.valid = true;
      cs.entries.push_back(c);
      obs.push_back(project(kCam, c.p3d_cam1));
    }
    std::vector<double> weights(8, 1.0);
    RansacConfig tiny = cfg;
    tiny.require_gate = false;
    tiny.iterations = 10;
    CHECK_THROWS_AS(
        run_weighted_ransac(cs, obs, weights, Pose::identity(), kCam, tiny),
        NoHypothesisError);
  }
}
