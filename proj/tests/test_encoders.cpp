#include <doctest.h>

#include <stdexcept>

#include "dualenc/encoders.hpp"
#include "dualenc/ops.hpp"
#include "test_util.hpp"

using namespace dualenc;

namespace {

EncoderConfig toy_config() {
  EncoderConfig c;
  c.frame_dim = 16;
  c.vocab_size = 10;
  c.word_embed_dim = 6;
  c.gru_hidden = 8;
  c.conv_filters = 8;
  return c;
}

FrameFeatureSequence random_video(Rng& rng, const std::string& id, int frames, int dim) {
  FrameFeatureSequence v;
  v.video_id = id;
  v.num_frames = frames;
  v.frame_dim = dim;
  v.features = testutil::random_vec(rng, static_cast<std::size_t>(frames) * dim);
  return v;
}

TokenSequence tokens_of(std::vector<int> indices) {
  TokenSequence t;
  t.token_indices = std::move(indices);
  return t;
}

}  // namespace

TEST_CASE("encoding dims follow the configuration arithmetic") {
  EncoderConfig toy = toy_config();
  CHECK(toy.video_level1_dim() == 16);
  CHECK(toy.video_level2_dim() == 16);
  CHECK(toy.video_level3_dim() == 32);
  CHECK(toy.video_encoding_dim() == 64);
  CHECK(toy.text_level1_dim() == 10);
  CHECK(toy.text_level2_dim() == 16);
  CHECK(toy.text_level3_dim() == 24);
  CHECK(toy.text_encoding_dim() == 50);

  EncoderConfig full;  // production-scale defaults
  full.frame_dim = 4096;
  full.vocab_size = 7807;
  CHECK(full.video_level2_dim() == 1024);
  CHECK(full.video_level3_dim() == 2048);
  CHECK(full.text_level3_dim() == 1536);
}

TEST_CASE("encode_video output dim is independent of the frame count") {
  Rng rng(40);
  EncoderConfig cfg = toy_config();
  VideoEncoderParams p = VideoEncoderParams::create(cfg, rng);
  for (int frames : {1, 3, 9}) {
    FrameFeatureSequence v = random_video(rng, "v", frames, cfg.frame_dim);
    MultiLevelEncoding enc = encode_video(v, p);
    CHECK(enc.concatenated.dim(0) == cfg.video_encoding_dim());
  }
}

TEST_CASE("single-frame video level1 is the frame itself") {
  Rng rng(41);
  EncoderConfig cfg = toy_config();
  VideoEncoderParams p = VideoEncoderParams::create(cfg, rng);
  FrameFeatureSequence v = random_video(rng, "v", 1, cfg.frame_dim);
  MultiLevelEncoding enc = encode_video(v, p);
  CHECK(testutil::max_abs_diff(enc.level1.values(), v.features) == 0.0);
}

TEST_CASE("video level1 is permutation invariant, deeper levels are not") {
  Rng rng(42);
  EncoderConfig cfg = toy_config();
  VideoEncoderParams p = VideoEncoderParams::create(cfg, rng);
  FrameFeatureSequence v = random_video(rng, "v", 5, cfg.frame_dim);
  FrameFeatureSequence reversed = v;
  for (int t = 0; t < v.num_frames; ++t) {
    for (int i = 0; i < v.frame_dim; ++i) {
      reversed.features[static_cast<std::size_t>(t) * cfg.frame_dim + i] =
          v.features[static_cast<std::size_t>(v.num_frames - 1 - t) * cfg.frame_dim + i];
    }
  }
  MultiLevelEncoding a = encode_video(v, p);
  MultiLevelEncoding b = encode_video(reversed, p);
  CHECK(testutil::max_abs_diff(a.level1.values(), b.level1.values()) < 1e-12);
  CHECK(testutil::max_abs_diff(a.level2.values(), b.level2.values()) > 1e-9);
  CHECK(testutil::max_abs_diff(a.level3.values(), b.level3.values()) > 1e-9);
}

TEST_CASE("encoding is bitwise deterministic") {
  Rng rng(43);
  EncoderConfig cfg = toy_config();
  VideoEncoderParams p = VideoEncoderParams::create(cfg, rng);
  FrameFeatureSequence v = random_video(rng, "v", 4, cfg.frame_dim);
  auto a = encode_video(v, p).concatenated.values();
  auto b = encode_video(v, p).concatenated.values();
  CHECK(a == b);
}

TEST_CASE("zero parameters zero out levels two and three only") {
  Rng rng(44);
  EncoderConfig cfg = toy_config();
  VideoEncoderParams p = VideoEncoderParams::create(cfg, rng);
  for (auto& [name, tensor] : [&] {
         ParamList list;
         p.register_into(list, "video");
         return list;
       }()) {
    std::fill(tensor.mutable_values().begin(), tensor.mutable_values().end(), 0.0);
  }
  FrameFeatureSequence v = random_video(rng, "v", 4, cfg.frame_dim);
  MultiLevelEncoding enc = encode_video(v, p);
  for (double x : enc.level2.values()) CHECK(x == 0.0);
  for (double x : enc.level3.values()) CHECK(x == 0.0);
  double sum = 0.0;
  for (double x : enc.level1.values()) sum += std::fabs(x);
  CHECK(sum > 0.0);
}

TEST_CASE("bag-of-words level1 counts term frequency over sentence length") {
  Rng rng(45);
  EncoderConfig cfg = toy_config();
  cfg.vocab_size = 3;
  TextEncoderParams p = TextEncoderParams::create(cfg, rng);
  // "a a b" with vocabulary (a, b, c)
  MultiLevelEncoding enc = encode_text(tokens_of({0, 0, 1}), p);
  CHECK(enc.level1.values() == std::vector<double>{2.0 / 3.0, 1.0 / 3.0, 0.0});

  MultiLevelEncoding single = encode_text(tokens_of({2}), p);
  CHECK(single.level1.values() == std::vector<double>{0.0, 0.0, 1.0});
}

TEST_CASE("encode_text output dim is independent of sentence length") {
  Rng rng(46);
  EncoderConfig cfg = toy_config();
  TextEncoderParams p = TextEncoderParams::create(cfg, rng);
  for (int len : {1, 4, 17}) {
    std::vector<int> idx(static_cast<std::size_t>(len));
    for (auto& i : idx) i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cfg.vocab_size)));
    CHECK(encode_text(tokens_of(idx), p).concatenated.dim(0) == cfg.text_encoding_dim());
  }
}

TEST_CASE("encode_text rejects empty and out-of-range input") {
  Rng rng(47);
  EncoderConfig cfg = toy_config();
  TextEncoderParams p = TextEncoderParams::create(cfg, rng);
  CHECK_THROWS_AS(encode_text(tokens_of({}), p), std::invalid_argument);
  CHECK_THROWS_AS(encode_text(tokens_of({cfg.vocab_size}), p), std::out_of_range);
}

TEST_CASE("encode_video rejects an empty frame sequence") {
  Rng rng(48);
  EncoderConfig cfg = toy_config();
  VideoEncoderParams p = VideoEncoderParams::create(cfg, rng);
  FrameFeatureSequence v;
  v.video_id = "empty";
  v.frame_dim = cfg.frame_dim;
  CHECK_THROWS_AS(encode_video(v, p), std::invalid_argument);
}
