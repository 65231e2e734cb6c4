#pragma once

#include <span>
#include <vector>

#include "dualenc/nn.hpp"

namespace dualenc {

// Inference-side embedding: a latent vector scored by cosine and a concept
// probability vector scored by generalized Jaccard.
struct HybridEmbedding {
  std::vector<double> latent;
  std::vector<double> concept_probs;
};

struct LossConfig {
  double margin = 0.2;
  double alpha = 0.6;
  double bce_clamp = 1e-7;

  void validate() const;
};

// One side of a hybrid-space projection: an affine map followed by batch
// normalization (the concept branch additionally applies a sigmoid).
struct HybridProjection {
  Tensor weight;  // {out_dim, in_dim}
  Tensor bias;    // {out_dim}
  BatchNormParams bn;

  static HybridProjection create(int in_dim, int out_dim, Rng& rng);
  void register_into(ParamList& params, const std::string& prefix) const;
};

// f = BN(W phi + b); accepts {in} or {B, in}
Tensor project_latent(const Tensor& phi, const Tensor& w, const Tensor& b, BatchNormParams& bn,
                      BnMode mode);
// g = sigmoid(BN(W phi + b)), strictly inside (0, 1)
Tensor project_concept(const Tensor& phi, const Tensor& w, const Tensor& b, BatchNormParams& bn,
                       BnMode mode);

inline Tensor project_latent(const Tensor& phi, HybridProjection& p, BnMode mode) {
  return project_latent(phi, p.weight, p.bias, p.bn, mode);
}
inline Tensor project_concept(const Tensor& phi, HybridProjection& p, BnMode mode) {
  return project_concept(phi, p.weight, p.bias, p.bn, mode);
}

// cosine similarity; throws on a zero vector
double sim_latent(std::span<const double> fv, std::span<const double> fs);

// generalized Jaccard similarity over non-negative vectors; two all-zero
// vectors compare as 0
double sim_concept(std::span<const double> gv, std::span<const double> gs);

// Min-max normalizes each score list over the candidate set (a constant list
// collapses to all zeros), then blends alpha * latent + (1 - alpha) * concept.
std::vector<double> fuse_similarities(const std::vector<double>& latent_scores,
                                      const std::vector<double>& concept_scores, double alpha);

// L_con = BCE + hinge ranking over the concept similarity matrix
Tensor concept_space_loss(const Tensor& gv, const Tensor& gs, const Tensor& y,
                          const Tensor& s_con, double margin, double bce_clamp = 1e-7);

struct JointLoss {
  Tensor total;
  Tensor latent_rank;
  Tensor concept_rank;
  Tensor bce;
  Tensor s_lat;  // {B, B} cosine similarities, diagonal = relevant pairs
  Tensor s_con;  // {B, B} Jaccard similarities
};

// Builds both similarity matrices from projected batches {B, L} / {B, K} and
// sums the latent and concept losses over the batch.
JointLoss joint_loss(const Tensor& fv, const Tensor& fs, const Tensor& gv, const Tensor& gs,
                     const Tensor& y, double margin, double bce_clamp = 1e-7);

}  // namespace dualenc
