#include "dualenc/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dualenc/ops.hpp"

namespace dualenc {

void LossConfig::validate() const {
  if (margin < 0.0) throw std::invalid_argument("loss config: margin must be >= 0");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("loss config: alpha must be in [0, 1]");
  if (bce_clamp <= 0.0 || bce_clamp >= 0.5) {
    throw std::invalid_argument("loss config: bce_clamp must be in (0, 0.5)");
  }
}

HybridProjection HybridProjection::create(int in_dim, int out_dim, Rng& rng) {
  HybridProjection p;
  p.weight = init_uniform({out_dim, in_dim}, in_dim, rng);
  p.bias = init_uniform({out_dim}, in_dim, rng);
  p.bn = BatchNormParams::create(out_dim);
  return p;
}

void HybridProjection::register_into(ParamList& params, const std::string& prefix) const {
  params.emplace_back(prefix + ".weight", weight);
  params.emplace_back(prefix + ".bias", bias);
  bn.register_into(params, prefix + ".bn");
}

namespace {

Tensor project(const Tensor& phi, const Tensor& w, const Tensor& b, BatchNormParams& bn,
               BnMode mode, bool squash) {
  const bool single = phi.rank() == 1;
  Tensor batch = single ? stack_rows({phi}) : phi;
  Tensor projected = batchnorm(matvec_affine(batch, w, b), bn, mode);
  if (squash) projected = sigmoid(projected);
  return single ? row(projected, 0) : projected;
}

}  // namespace

Tensor project_latent(const Tensor& phi, const Tensor& w, const Tensor& b, BatchNormParams& bn,
                      BnMode mode) {
  return project(phi, w, b, bn, mode, /*squash=*/false);
}

Tensor project_concept(const Tensor& phi, const Tensor& w, const Tensor& b, BatchNormParams& bn,
                       BnMode mode) {
  return project(phi, w, b, bn, mode, /*squash=*/true);
}

double sim_latent(std::span<const double> fv, std::span<const double> fs) {
  if (fv.size() != fs.size()) {
    throw std::invalid_argument("sim_latent: dimension mismatch " + std::to_string(fv.size()) +
                                " vs " + std::to_string(fs.size()));
  }
  double dot = 0.0, nv = 0.0, ns = 0.0;
  for (std::size_t i = 0; i < fv.size(); ++i) {
    dot += fv[i] * fs[i];
    nv += fv[i] * fv[i];
    ns += fs[i] * fs[i];
  }
  if (nv == 0.0 || ns == 0.0) {
    throw std::invalid_argument("sim_latent: cosine undefined for a zero vector");
  }
  return dot / (std::sqrt(nv) * std::sqrt(ns));
}

double sim_concept(std::span<const double> gv, std::span<const double> gs) {
  if (gv.size() != gs.size()) {
    throw std::invalid_argument("sim_concept: dimension mismatch " + std::to_string(gv.size()) +
                                " vs " + std::to_string(gs.size()));
  }
  double mins = 0.0, maxs = 0.0;
  for (std::size_t i = 0; i < gv.size(); ++i) {
    if (gv[i] < 0.0 || gs[i] < 0.0) {
      throw std::invalid_argument("sim_concept: entries must be non-negative");
    }
    mins += std::min(gv[i], gs[i]);
    maxs += std::max(gv[i], gs[i]);
  }
  return maxs == 0.0 ? 0.0 : mins / maxs;
}

namespace {

// degenerate max == min collapses to zeros so the other subspace decides
std::vector<double> min_max_normalize(const std::vector<double>& scores) {
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<double> out(scores.size(), 0.0);
  if (hi > lo) {
    const double span = hi - lo;
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - lo) / span;
  }
  return out;
}

}  // namespace

std::vector<double> fuse_similarities(const std::vector<double>& latent_scores,
                                      const std::vector<double>& concept_scores, double alpha) {
  if (latent_scores.empty()) {
    throw std::invalid_argument("fuse_similarities: empty candidate list");
  }
  if (latent_scores.size() != concept_scores.size()) {
    throw std::invalid_argument("fuse_similarities: list sizes differ: " +
                                std::to_string(latent_scores.size()) + " vs " +
                                std::to_string(concept_scores.size()));
  }
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("fuse_similarities: alpha must be in [0, 1]");
  }
  std::vector<double> lat = min_max_normalize(latent_scores);
  std::vector<double> con = min_max_normalize(concept_scores);
  std::vector<double> fused(lat.size());
  for (std::size_t i = 0; i < fused.size(); ++i) {
    fused[i] = alpha * lat[i] + (1.0 - alpha) * con[i];
  }
  return fused;
}

Tensor concept_space_loss(const Tensor& gv, const Tensor& gs, const Tensor& y,
                          const Tensor& s_con, double margin, double bce_clamp) {
  return add(bce_concept_loss(gv, gs, y, bce_clamp), triplet_loss_hardest(s_con, margin));
}

JointLoss joint_loss(const Tensor& fv, const Tensor& fs, const Tensor& gv, const Tensor& gs,
                     const Tensor& y, double margin, double bce_clamp) {
  if (!y.defined()) {
    throw std::invalid_argument("joint_loss: batch has no concept labels");
  }
  JointLoss loss;
  loss.s_lat = cosine_matrix(fv, fs);
  loss.s_con = jaccard_matrix(gv, gs);
  loss.latent_rank = triplet_loss_hardest(loss.s_lat, margin);
  loss.concept_rank = triplet_loss_hardest(loss.s_con, margin);
  loss.bce = bce_concept_loss(gv, gs, y, bce_clamp);
  loss.total = add(loss.latent_rank, add(loss.bce, loss.concept_rank));
  return loss;
}

}  // namespace dualenc
