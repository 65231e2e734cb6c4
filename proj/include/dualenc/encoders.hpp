#pragma once

#include <string>
#include <vector>

#include "dualenc/nn.hpp"
#include "dualenc/text.hpp"

namespace dualenc {

// Precomputed frame features for one video, row-major {num_frames, frame_dim}.
struct FrameFeatureSequence {
  std::string video_id;
  int num_frames = 0;
  int frame_dim = 0;
  std::vector<double> features;

  void validate() const;
  Tensor as_tensor() const;  // constant {n, d} tensor
};

struct EncoderConfig {
  int frame_dim = 0;
  int vocab_size = 0;
  int word_embed_dim = 500;
  int gru_hidden = 512;
  int conv_filters = 512;
  std::vector<int> video_kernels{2, 3, 4, 5};
  std::vector<int> text_kernels{2, 3, 4};

  int video_level1_dim() const { return frame_dim; }
  int video_level2_dim() const { return 2 * gru_hidden; }
  int video_level3_dim() const { return conv_filters * static_cast<int>(video_kernels.size()); }
  int video_encoding_dim() const {
    return video_level1_dim() + video_level2_dim() + video_level3_dim();
  }
  int text_level1_dim() const { return vocab_size; }
  int text_level2_dim() const { return 2 * gru_hidden; }
  int text_level3_dim() const { return conv_filters * static_cast<int>(text_kernels.size()); }
  int text_encoding_dim() const {
    return text_level1_dim() + text_level2_dim() + text_level3_dim();
  }

  void validate() const;
};

struct VideoEncoderParams {
  GruParams gru_fwd, gru_bwd;
  std::vector<Conv1dParams> convs;  // one per kernel size

  static VideoEncoderParams create(const EncoderConfig& config, Rng& rng);
  void register_into(ParamList& params, const std::string& prefix) const;
};

struct TextEncoderParams {
  Tensor embedding;  // {vocab_size, word_embed_dim}
  GruParams gru_fwd, gru_bwd;
  std::vector<Conv1dParams> convs;

  static TextEncoderParams create(const EncoderConfig& config, Rng& rng);
  void register_into(ParamList& params, const std::string& prefix) const;
};

// Coarse-to-fine encoding: global statistics, recurrent feature map, and
// convolutional local patterns, plus their concatenation.
struct MultiLevelEncoding {
  Tensor level1, level2, level3;
  Tensor concatenated;
};

MultiLevelEncoding encode_video(const FrameFeatureSequence& frames, const VideoEncoderParams& p);
MultiLevelEncoding encode_text(const TokenSequence& tokens, const TextEncoderParams& p);

}  // namespace dualenc
