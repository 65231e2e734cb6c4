#include "dualenc/model.hpp"

#include <stdexcept>

#include "dualenc/ops.hpp"

namespace dualenc {

void ModelConfig::validate() const {
  encoder.validate();
  if (latent_dim <= 0 || concept_dim <= 0) {
    throw std::invalid_argument("model config: hybrid dims must be positive, got latent " +
                                std::to_string(latent_dim) + ", concept " +
                                std::to_string(concept_dim));
  }
}

DualEncodingModel DualEncodingModel::create(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  DualEncodingModel model;
  model.config = config;
  model.video = VideoEncoderParams::create(config.encoder, rng);
  model.text = TextEncoderParams::create(config.encoder, rng);
  model.latent_video =
      HybridProjection::create(config.encoder.video_encoding_dim(), config.latent_dim, rng);
  model.latent_text =
      HybridProjection::create(config.encoder.text_encoding_dim(), config.latent_dim, rng);
  model.concept_video =
      HybridProjection::create(config.encoder.video_encoding_dim(), config.concept_dim, rng);
  model.concept_text =
      HybridProjection::create(config.encoder.text_encoding_dim(), config.concept_dim, rng);

  model.video.register_into(model.params, "video");
  model.text.register_into(model.params, "text");
  model.latent_video.register_into(model.params, "latent_video");
  model.latent_text.register_into(model.params, "latent_text");
  model.concept_video.register_into(model.params, "concept_video");
  model.concept_text.register_into(model.params, "concept_text");
  return model;
}

DualEncodingModel::BatchEmbeddings DualEncodingModel::forward_batch(
    const std::vector<const FrameFeatureSequence*>& videos,
    const std::vector<const TokenSequence*>& sentences, BnMode mode) {
  if (videos.size() != sentences.size() || videos.empty()) {
    throw std::invalid_argument("forward_batch: need equally many videos and sentences");
  }
  std::vector<Tensor> phi_v, phi_s;
  phi_v.reserve(videos.size());
  phi_s.reserve(sentences.size());
  for (const auto* v : videos) phi_v.push_back(encode_video(*v, video).concatenated);
  for (const auto* s : sentences) phi_s.push_back(encode_text(*s, text).concatenated);
  Tensor phi_v_batch = stack_rows(phi_v);
  Tensor phi_s_batch = stack_rows(phi_s);
  BatchEmbeddings out;
  out.fv = project_latent(phi_v_batch, latent_video, mode);
  out.fs = project_latent(phi_s_batch, latent_text, mode);
  out.gv = project_concept(phi_v_batch, concept_video, mode);
  out.gs = project_concept(phi_s_batch, concept_text, mode);
  return out;
}

HybridEmbedding DualEncodingModel::embed_video(const FrameFeatureSequence& frames) {
  NoGradGuard guard;
  Tensor phi = encode_video(frames, video).concatenated;
  Tensor f = project_latent(phi, latent_video, BnMode::kEval);
  Tensor g = project_concept(phi, concept_video, BnMode::kEval);
  return {f.values(), g.values()};
}

HybridEmbedding DualEncodingModel::embed_text(const TokenSequence& tokens) {
  NoGradGuard guard;
  Tensor phi = encode_text(tokens, text).concatenated;
  Tensor f = project_latent(phi, latent_text, BnMode::kEval);
  Tensor g = project_concept(phi, concept_text, BnMode::kEval);
  return {f.values(), g.values()};
}

void DualEncodingModel::zero_grad() {
  for (auto& [name, tensor] : params) {
    if (tensor.requires_grad()) tensor.zero_grad();
  }
}

}  // namespace dualenc
