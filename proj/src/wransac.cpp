#include "gcr/wransac.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "gcr/util.hpp"

namespace gcr {

namespace {

struct Hypothesis {
  Pose pose;
  double score;
  int inliers;
};

struct ValidView {
  std::vector<const Correspondence*> entries;
};

ValidView collect_valid(const CorrespondenceSet& cs) {
  ValidView v;
  for (const auto& e : cs.entries)
    if (e.valid) v.entries.push_back(&e);
  return v;
}

// Shared scoring path for the live loop and the exhaustive oracle:
// solve on the (sorted) subset, count inliers over all valid entries.
std::optional<Hypothesis> evaluate_subset(
    const ValidView& view, const std::vector<Pixel>& observed,
    const std::vector<int>& indices, const CorrespondenceSet& cs,
    const Pose& p_reg, const CameraIntrinsics& k2, const RansacConfig& cfg) {
  std::vector<Vec3> pts;
  std::vector<Pixel> pix;
  pts.reserve(indices.size());
  pix.reserve(indices.size());
  for (int idx : indices) {
    pts.push_back(view.entries[std::size_t(idx)]->p3d_cam1);
    pix.push_back(observed[std::size_t(idx)]);
  }
  for (const auto& p : pix)
    if (!std::isfinite(p.u) || !std::isfinite(p.v)) return std::nullopt;
  Pose candidate;
  try {
    candidate = solve_pnp(PnpSample{std::move(pts), std::move(pix), k2});
  } catch (const SolveError&) {
    return std::nullopt;
  }
  const auto errors = reprojection_errors(candidate, cs, observed, k2);
  const int inliers = count_inliers(errors, cfg.inlier_threshold);
  const double score =
      score_hypothesis(candidate, inliers, p_reg, cfg.beta, cfg.tau);
  return Hypothesis{candidate, score, inliers};
}

void check_alignment(const ValidView& view, const std::vector<Pixel>& observed,
                     const RansacConfig& cfg) {
  if (observed.size() != view.entries.size())
    throw Error("observed pixels not aligned with valid entries");
  if (int(view.entries.size()) < cfg.sample_size)
    throw Error("insufficient support");
}

}  // namespace

void validate(const RansacConfig& cfg) {
  if (cfg.iterations < 1) throw Error("ransac config: iterations must be >= 1");
  if (cfg.sample_size < 6) throw Error("ransac config: sample_size must be >= 6");
  if (!(cfg.inlier_threshold > 0.0))
    throw Error("ransac config: inlier_threshold must be positive");
  if (!(cfg.tau > 0.0)) throw Error("ransac config: tau must be positive");
  if (cfg.beta < 0.0) throw Error("ransac config: beta must be non-negative");
}

std::vector<int> weighted_sample(const std::vector<double>& weights, int k,
                                 Rng& rng) {
  if (k < 1) throw Error("sample size must be >= 1");
  int positive = 0;
  for (double w : weights) {
    if (w < 0.0) throw Error("weights must be non-negative");
    if (w > 0.0) ++positive;
  }
  if (positive < k) throw Error("insufficient support");

  std::vector<double> remaining = weights;
  std::vector<int> picked;
  picked.reserve(std::size_t(k));
  for (int draw = 0; draw < k; ++draw) {
    double total = 0.0;
    for (double w : remaining) total += w;
    const double u = rng.uniform() * total;
    double cum = 0.0;
    int chosen = -1;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (remaining[i] <= 0.0) continue;
      cum += remaining[i];
      if (u < cum) {
        chosen = int(i);
        break;
      }
    }
    if (chosen < 0) {  // u landed on the accumulated rounding tail
      for (std::size_t i = remaining.size(); i-- > 0;) {
        if (remaining[i] > 0.0) {
          chosen = int(i);
          break;
        }
      }
    }
    picked.push_back(chosen);
    remaining[std::size_t(chosen)] = 0.0;
  }
  return picked;
}

double score_hypothesis(const Pose& p_candidate, int inlier_count,
                        const Pose& p_regression, double beta, double tau) {
  if (beta < 0.0) throw Error("beta must be non-negative");
  if (!(tau > 0.0)) throw Error("tau must be positive");
  return double(inlier_count) +
         beta * std::exp(-pose_frobenius_distance(p_candidate, p_regression) / tau);
}

RansacResult run_weighted_ransac(const CorrespondenceSet& cs,
                                 const std::vector<Pixel>& observed_pixels2,
                                 const std::vector<double>& weights,
                                 const Pose& p_reg,
                                 const CameraIntrinsics& k2,
                                 const RansacConfig& cfg) {
  validate(cfg);
  if (cfg.require_gate && !gate_sufficient(cs))
    throw Error("insufficient support");
  const ValidView view = collect_valid(cs);
  check_alignment(view, observed_pixels2, cfg);
  if (weights.size() != view.entries.size())
    throw Error("weights not aligned with valid entries");

  RansacResult result;
  result.prior = p_reg;
  result.beta = cfg.beta;
  result.tau = cfg.tau;
  result.iterations_run = cfg.iterations;
  result.trace.reserve(std::size_t(cfg.iterations));

  bool have_best = false;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    Rng rng(derive_seed(cfg.seed, "ransac-iter", std::uint64_t(iter)));
    std::vector<int> indices = weighted_sample(weights, cfg.sample_size, rng);
    std::sort(indices.begin(), indices.end());

    RansacIterationTrace tr;
    tr.iteration = iter;
    tr.indices = indices;
    const auto hyp =
        evaluate_subset(view, observed_pixels2, indices, cs, p_reg, k2, cfg);
    if (hyp) {
      tr.solved = true;
      tr.score = hyp->score;
      tr.inliers = hyp->inliers;
      if (!have_best || hyp->score > result.score) {
        have_best = true;
        result.pose = hyp->pose;
        result.score = hyp->score;
        result.inlier_count = hyp->inliers;
      }
    }
    result.trace.push_back(std::move(tr));
  }
  if (!have_best) throw NoHypothesisError();
  return result;
}

RansacResult exhaustive_ransac_oracle(const CorrespondenceSet& cs,
                                      const std::vector<Pixel>& observed_pixels2,
                                      const Pose& p_reg,
                                      const CameraIntrinsics& k2,
                                      const RansacConfig& cfg) {
  validate(cfg);
  const ValidView view = collect_valid(cs);
  if (view.entries.size() > 12) throw Error("oracle bound exceeded");
  check_alignment(view, observed_pixels2, cfg);

  const int n = int(view.entries.size());
  const int k = cfg.sample_size;
  RansacResult result;
  result.prior = p_reg;
  result.beta = cfg.beta;
  result.tau = cfg.tau;

  std::vector<int> indices(static_cast<std::size_t>(k), 0);
  for (int i = 0; i < k; ++i) indices[std::size_t(i)] = i;
  bool have_best = false;
  int counter = 0;
  while (true) {
    RansacIterationTrace tr;
    tr.iteration = counter++;
    tr.indices = indices;
    const auto hyp =
        evaluate_subset(view, observed_pixels2, indices, cs, p_reg, k2, cfg);
    if (hyp) {
      tr.solved = true;
      tr.score = hyp->score;
      tr.inliers = hyp->inliers;
      if (!have_best || hyp->score > result.score) {
        have_best = true;
        result.pose = hyp->pose;
        result.score = hyp->score;
        result.inlier_count = hyp->inliers;
      }
    }
    result.trace.push_back(std::move(tr));

    // next lexicographic combination
    int pos = k - 1;
    while (pos >= 0 && indices[std::size_t(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++indices[std::size_t(pos)];
    for (int j = pos + 1; j < k; ++j)
      indices[std::size_t(j)] = indices[std::size_t(j - 1)] + 1;
  }
  result.iterations_run = counter;
  if (!have_best) throw NoHypothesisError();
  return result;
}

std::string trace_to_jsonl(const RansacResult& result) {
  std::ostringstream out;
  for (const auto& tr : result.trace) {
    out << "{\"iter\":" << tr.iteration << ",\"indices\":[";
    for (std::size_t i = 0; i < tr.indices.size(); ++i) {
      if (i) out << ',';
      out << tr.indices[i];
    }
    out << "],\"score\":";
    if (tr.solved)
      out << format_g17(tr.score) << ",\"inliers\":" << tr.inliers;
    else
      out << "null,\"inliers\":null";
    out << "}\n";
  }
  return out.str();
}

}  // namespace gcr
