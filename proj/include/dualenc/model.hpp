#pragma once

#include <cstdint>
#include <vector>

#include "dualenc/encoders.hpp"
#include "dualenc/hybrid.hpp"

namespace dualenc {

struct ModelConfig {
  EncoderConfig encoder;
  int latent_dim = 1536;
  int concept_dim = 512;

  void validate() const;
};

// The whole trainable network: one multi-level encoder per modality and four
// hybrid-space projections. `params` lists every tensor (weights plus BN
// buffers) in a stable order used by the optimizer and the checkpoint format.
struct DualEncodingModel {
  ModelConfig config;
  VideoEncoderParams video;
  TextEncoderParams text;
  HybridProjection latent_video, latent_text, concept_video, concept_text;
  ParamList params;

  static DualEncodingModel create(const ModelConfig& config, std::uint64_t seed);

  struct BatchEmbeddings {
    Tensor fv, fs;  // {B, latent_dim}
    Tensor gv, gs;  // {B, concept_dim}
  };

  // Forward for a batch of aligned (video, sentence) pairs. Train mode uses
  // batch statistics and updates the BN buffers.
  BatchEmbeddings forward_batch(const std::vector<const FrameFeatureSequence*>& videos,
                                const std::vector<const TokenSequence*>& sentences, BnMode mode);

  // Single-item inference: frozen statistics, no tape. Safe to call
  // concurrently once training is done.
  HybridEmbedding embed_video(const FrameFeatureSequence& frames);
  HybridEmbedding embed_text(const TokenSequence& tokens);

  void zero_grad();
};

}  // namespace dualenc
