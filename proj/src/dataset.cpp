#include "dualenc/dataset.hpp"

#include <stdexcept>
#include <unordered_map>

namespace dualenc {

TrainingDataset TrainingDataset::assemble(std::vector<FrameFeatureSequence> videos,
                                          const std::vector<CaptionRecord>& captions,
                                          const Vocabulary& vocab,
                                          const ConceptVocabulary& cvocab,
                                          const LemmaTable& lemmas, int sentence_cap,
                                          int label_dim) {
  if (label_dim == 0) label_dim = cvocab.size();
  if (label_dim < cvocab.size()) {
    throw std::invalid_argument("dataset: label_dim " + std::to_string(label_dim) +
                                " is smaller than the concept vocabulary (" +
                                std::to_string(cvocab.size()) + ")");
  }
  TrainingDataset data;
  data.videos_ = std::move(videos);
  std::unordered_map<std::string, int> video_index;
  for (int i = 0; i < data.num_videos(); ++i) {
    data.videos_[static_cast<std::size_t>(i)].validate();
    if (!video_index.emplace(data.videos_[static_cast<std::size_t>(i)].video_id, i).second) {
      throw std::invalid_argument("dataset: duplicate video id '" +
                                  data.videos_[static_cast<std::size_t>(i)].video_id + "'");
    }
  }
  data.video_captions_.resize(data.videos_.size());
  for (const auto& record : captions) {
    auto it = video_index.find(record.video_id);
    if (it == video_index.end()) {
      throw std::invalid_argument("dataset: caption '" + record.caption_id +
                                  "' references unknown video '" + record.video_id + "'");
    }
    TokenSequence seq = preprocess(record.sentence, vocab, record.caption_id, sentence_cap);
    data.video_captions_[static_cast<std::size_t>(it->second)].push_back(data.num_pairs());
    data.caption_video_.push_back(it->second);
    data.captions_.push_back(std::move(seq));
  }
  for (int i = 0; i < data.num_videos(); ++i) {
    if (data.video_captions_[static_cast<std::size_t>(i)].empty()) {
      throw std::invalid_argument("dataset: video '" +
                                  data.videos_[static_cast<std::size_t>(i)].video_id +
                                  "' has no captions");
    }
  }
  data.labels_.reserve(data.videos_.size());
  for (int i = 0; i < data.num_videos(); ++i) {
    std::vector<TokenSequence> sentences;
    for (int c : data.video_captions_[static_cast<std::size_t>(i)]) {
      sentences.push_back(data.captions_[static_cast<std::size_t>(c)]);
    }
    std::vector<double> y = extract_soft_labels(sentences, cvocab, lemmas);
    y.resize(static_cast<std::size_t>(label_dim), 0.0);
    data.labels_.push_back(std::move(y));
  }
  return data;
}

std::vector<std::vector<int>> make_batches(const TrainingDataset& dataset, int batch_size,
                                           Rng& rng) {
  if (batch_size < 2) {
    throw std::invalid_argument("make_batches: batch_size must be >= 2, got " +
                                std::to_string(batch_size));
  }
  std::vector<int> remaining(static_cast<std::size_t>(dataset.num_pairs()));
  for (int i = 0; i < dataset.num_pairs(); ++i) remaining[static_cast<std::size_t>(i)] = i;
  rng.shuffle(remaining);

  std::vector<std::vector<int>> batches;
  while (!remaining.empty()) {
    std::vector<int> batch;
    std::vector<bool> taken(remaining.size(), false);
    std::vector<bool> video_used(static_cast<std::size_t>(dataset.num_videos()), false);
    for (std::size_t i = 0; i < remaining.size() && static_cast<int>(batch.size()) < batch_size;
         ++i) {
      const int video = dataset.caption_video(remaining[i]);
      if (video_used[static_cast<std::size_t>(video)]) continue;
      video_used[static_cast<std::size_t>(video)] = true;
      batch.push_back(remaining[i]);
      taken[i] = true;
    }
    std::vector<int> rest;
    rest.reserve(remaining.size() - batch.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (!taken[i]) rest.push_back(remaining[i]);
    }
    remaining = std::move(rest);
    if (batch.size() >= 2) batches.push_back(std::move(batch));
    // a stranded single pair has no usable negative and is skipped this epoch
  }
  return batches;
}

std::vector<std::vector<int>> make_batches(const TrainingDataset& dataset, int batch_size,
                                           std::uint64_t seed) {
  Rng rng(seed);
  return make_batches(dataset, batch_size, rng);
}

}  // namespace dualenc
