#include "dualenc/encoders.hpp"

#include <cmath>
#include <stdexcept>

#include "dualenc/ops.hpp"

namespace dualenc {

void FrameFeatureSequence::validate() const {
  if (num_frames < 1) {
    throw std::invalid_argument("video '" + video_id + "' has no frames");
  }
  if (frame_dim < 1 ||
      features.size() != static_cast<std::size_t>(num_frames) * static_cast<std::size_t>(frame_dim)) {
    throw std::invalid_argument("video '" + video_id + "': feature buffer does not match " +
                                std::to_string(num_frames) + "x" + std::to_string(frame_dim));
  }
  for (double v : features) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("video '" + video_id + "' contains a non-finite feature value");
    }
  }
}

Tensor FrameFeatureSequence::as_tensor() const {
  validate();
  return Tensor::from_data({num_frames, frame_dim}, features);
}

void EncoderConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) {
      throw std::invalid_argument(std::string("encoder config: ") + name + " must be positive, got " +
                                  std::to_string(v));
    }
  };
  positive(frame_dim, "frame_dim");
  positive(vocab_size, "vocab_size");
  positive(word_embed_dim, "word_embed_dim");
  positive(gru_hidden, "gru_hidden");
  positive(conv_filters, "conv_filters");
  if (video_kernels.empty() || text_kernels.empty()) {
    throw std::invalid_argument("encoder config: kernel sets must be non-empty");
  }
  for (int k : video_kernels) positive(k, "video kernel size");
  for (int k : text_kernels) positive(k, "text kernel size");
}

VideoEncoderParams VideoEncoderParams::create(const EncoderConfig& config, Rng& rng) {
  VideoEncoderParams p;
  p.gru_fwd = GruParams::create(config.frame_dim, config.gru_hidden, rng);
  p.gru_bwd = GruParams::create(config.frame_dim, config.gru_hidden, rng);
  for (int k : config.video_kernels) {
    p.convs.push_back(Conv1dParams::create(k, config.conv_filters, 2 * config.gru_hidden, rng));
  }
  return p;
}

void VideoEncoderParams::register_into(ParamList& params, const std::string& prefix) const {
  gru_fwd.register_into(params, prefix + ".gru_fwd");
  gru_bwd.register_into(params, prefix + ".gru_bwd");
  for (const auto& conv : convs) {
    conv.register_into(params, prefix + ".conv_k" + std::to_string(conv.kernel_size));
  }
}

TextEncoderParams TextEncoderParams::create(const EncoderConfig& config, Rng& rng) {
  TextEncoderParams p;
  p.embedding = init_uniform({config.vocab_size, config.word_embed_dim}, config.vocab_size, rng);
  p.gru_fwd = GruParams::create(config.word_embed_dim, config.gru_hidden, rng);
  p.gru_bwd = GruParams::create(config.word_embed_dim, config.gru_hidden, rng);
  for (int k : config.text_kernels) {
    p.convs.push_back(Conv1dParams::create(k, config.conv_filters, 2 * config.gru_hidden, rng));
  }
  return p;
}

void TextEncoderParams::register_into(ParamList& params, const std::string& prefix) const {
  params.emplace_back(prefix + ".embedding", embedding);
  gru_fwd.register_into(params, prefix + ".gru_fwd");
  gru_bwd.register_into(params, prefix + ".gru_bwd");
  for (const auto& conv : convs) {
    conv.register_into(params, prefix + ".conv_k" + std::to_string(conv.kernel_size));
  }
}

namespace {

MultiLevelEncoding encode_from(const Tensor& level1, const Tensor& sequence,
                               const GruParams& fwd, const GruParams& bwd,
                               const std::vector<Conv1dParams>& convs) {
  MultiLevelEncoding enc;
  enc.level1 = level1;
  Tensor feature_map = bigru(sequence, fwd, bwd);
  enc.level2 = pool_mean(feature_map);
  std::vector<Tensor> pooled;
  pooled.reserve(convs.size());
  for (const auto& conv : convs) pooled.push_back(conv1d_relu_maxpool(feature_map, conv));
  enc.level3 = concat(pooled);
  enc.concatenated = concat({enc.level1, enc.level2, enc.level3});
  return enc;
}

}  // namespace

MultiLevelEncoding encode_video(const FrameFeatureSequence& frames, const VideoEncoderParams& p) {
  Tensor sequence = frames.as_tensor();
  return encode_from(pool_mean(sequence), sequence, p.gru_fwd, p.gru_bwd, p.convs);
}

MultiLevelEncoding encode_text(const TokenSequence& tokens, const TextEncoderParams& p) {
  if (tokens.token_indices.empty()) {
    throw std::invalid_argument("encode_text: sentence '" + tokens.sentence_id + "' is empty");
  }
  const int vocab_size = p.embedding.dim(0);
  std::vector<double> bow(static_cast<std::size_t>(vocab_size), 0.0);
  for (int index : tokens.token_indices) {
    if (index < 0 || index >= vocab_size) {
      throw std::out_of_range("encode_text: token index " + std::to_string(index) +
                              " outside vocabulary of size " + std::to_string(vocab_size));
    }
    bow[static_cast<std::size_t>(index)] += 1.0;
  }
  const double m = static_cast<double>(tokens.token_indices.size());
  for (auto& v : bow) v /= m;
  Tensor level1 = Tensor::from_data({vocab_size}, std::move(bow));
  Tensor sequence = embedding_rows(p.embedding, tokens.token_indices);
  return encode_from(level1, sequence, p.gru_fwd, p.gru_bwd, p.convs);
}

}  // namespace dualenc
