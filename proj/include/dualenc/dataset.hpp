#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualenc/encoders.hpp"
#include "dualenc/rng.hpp"
#include "dualenc/text.hpp"

namespace dualenc {

struct CaptionRecord {
  std::string caption_id;  // video_id#caption_index
  std::string video_id;
  std::string sentence;
};

// The assembled (video, sentence, label) triplets: frame features, tokenized
// captions, and per-video soft concept labels. Indexed both by video and by
// caption.
class TrainingDataset {
 public:
  // label_dim >= cvocab.size(): labels are zero-padded up to the concept
  // space dimension when the corpus yields fewer than K concepts
  static TrainingDataset assemble(std::vector<FrameFeatureSequence> videos,
                                  const std::vector<CaptionRecord>& captions,
                                  const Vocabulary& vocab, const ConceptVocabulary& cvocab,
                                  const LemmaTable& lemmas, int sentence_cap, int label_dim = 0);

  int num_videos() const { return static_cast<int>(videos_.size()); }
  int num_pairs() const { return static_cast<int>(captions_.size()); }
  const FrameFeatureSequence& video(int index) const {
    return videos_.at(static_cast<std::size_t>(index));
  }
  const TokenSequence& caption(int index) const {
    return captions_.at(static_cast<std::size_t>(index));
  }
  int caption_video(int caption_index) const {
    return caption_video_.at(static_cast<std::size_t>(caption_index));
  }
  const std::vector<double>& label(int video_index) const {
    return labels_.at(static_cast<std::size_t>(video_index));
  }
  const std::vector<int>& captions_of(int video_index) const {
    return video_captions_.at(static_cast<std::size_t>(video_index));
  }

 private:
  std::vector<FrameFeatureSequence> videos_;
  std::vector<TokenSequence> captions_;
  std::vector<int> caption_video_;
  std::vector<std::vector<double>> labels_;
  std::vector<std::vector<int>> video_captions_;
};

// Shuffled batches of caption indices. No batch holds two captions of the
// same video, so every within-batch negative is a true negative. A leftover
// batch of one is dropped.
std::vector<std::vector<int>> make_batches(const TrainingDataset& dataset, int batch_size,
                                           Rng& rng);
std::vector<std::vector<int>> make_batches(const TrainingDataset& dataset, int batch_size,
                                           std::uint64_t seed);

}  // namespace dualenc
