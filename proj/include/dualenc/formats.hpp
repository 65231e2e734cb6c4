#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "dualenc/dataset.hpp"
#include "dualenc/encoders.hpp"
#include "dualenc/tensor.hpp"

namespace dualenc {

// Feature file: one line per frame, `video_id<TAB>frame_index<TAB>floats...`,
// frames of a video contiguous and 0-based in order. Pass expected_dim 0 to
// infer the dimension from the first line. Errors carry line numbers.
std::vector<FrameFeatureSequence> load_feature_file(const std::string& path, int expected_dim = 0);

// Caption file: `video_id#caption_index<TAB>sentence` per line.
std::vector<CaptionRecord> load_caption_file(const std::string& path);

// Optional pretrained word vectors: `word v1 v2 ... vd` per line. Overwrites
// the matching rows of the embedding table; unknown words are ignored.
// Returns the number of vocabulary words that received a vector.
int load_word_embeddings(const std::string& path, const Vocabulary& vocab, Tensor& embedding);

}  // namespace dualenc
