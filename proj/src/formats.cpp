#include "dualenc/formats.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace dualenc {

namespace {

[[noreturn]] void fail(const std::string& path, int line_no, const std::string& what) {
  throw std::runtime_error(path + " line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::vector<FrameFeatureSequence> load_feature_file(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature file: " + path);
  std::vector<FrameFeatureSequence> videos;
  std::unordered_set<std::string> finished;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      fail(path, line_no, "expected video_id<TAB>frame_index<TAB>features");
    }
    const std::string video_id = line.substr(0, tab1);
    if (video_id.empty()) fail(path, line_no, "empty video id");
    int frame_index = 0;
    try {
      frame_index = std::stoi(line.substr(tab1 + 1, tab2 - tab1 - 1));
    } catch (const std::exception&) {
      fail(path, line_no, "frame index is not an integer");
    }

    std::vector<double> values;
    if (expected_dim > 0) values.reserve(static_cast<std::size_t>(expected_dim));
    std::stringstream stream(line.substr(tab2 + 1));
    double v = 0.0;
    while (stream >> v) values.push_back(v);
    if (!stream.eof()) fail(path, line_no, "malformed feature value");
    if (values.empty()) fail(path, line_no, "no feature values");
    if (expected_dim == 0) expected_dim = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != expected_dim) {
      fail(path, line_no,
           "feature dimension mismatch: expected " + std::to_string(expected_dim) + ", got " +
               std::to_string(values.size()));
    }

    if (videos.empty() || videos.back().video_id != video_id) {
      if (finished.count(video_id)) {
        fail(path, line_no, "frames of video '" + video_id + "' are not contiguous");
      }
      if (!videos.empty()) finished.insert(videos.back().video_id);
      if (frame_index != 0) {
        fail(path, line_no, "video '" + video_id + "' must start at frame index 0");
      }
      FrameFeatureSequence seq;
      seq.video_id = video_id;
      seq.frame_dim = expected_dim;
      videos.push_back(std::move(seq));
    } else if (frame_index != videos.back().num_frames) {
      fail(path, line_no,
           "frame index " + std::to_string(frame_index) + " out of order for video '" + video_id +
               "' (expected " + std::to_string(videos.back().num_frames) + ")");
    }
    videos.back().features.insert(videos.back().features.end(), values.begin(), values.end());
    videos.back().num_frames += 1;
  }
  if (videos.empty()) throw std::runtime_error(path + ": no feature records");
  for (const auto& video : videos) video.validate();
  return videos;
}

std::vector<CaptionRecord> load_caption_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open caption file: " + path);
  std::vector<CaptionRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(path, line_no, "expected video_id#caption_index<TAB>sentence");
    }
    CaptionRecord record;
    record.caption_id = line.substr(0, tab);
    record.sentence = line.substr(tab + 1);
    const auto hash = record.caption_id.find('#');
    if (hash == std::string::npos || hash == 0) {
      fail(path, line_no, "caption id '" + record.caption_id + "' is not video_id#index");
    }
    record.video_id = record.caption_id.substr(0, hash);
    if (!seen.insert(record.caption_id).second) {
      fail(path, line_no, "duplicate caption id '" + record.caption_id + "'");
    }
    if (record.sentence.empty()) fail(path, line_no, "empty sentence");
    records.push_back(std::move(record));
  }
  if (records.empty()) throw std::runtime_error(path + ": no caption records");
  return records;
}

int load_word_embeddings(const std::string& path, const Vocabulary& vocab, Tensor& embedding) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open word embedding file: " + path);
  const int dim = embedding.dim(1);
  auto& table = embedding.mutable_values();
  int loaded = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream stream(line);
    std::string word;
    stream >> word;
    const int index = vocab.index_of(word);
    if (index == vocab.unk_index() && word != Vocabulary::kUnkToken) {
      continue;  // word not in the vocabulary
    }
    std::vector<double> values;
    double v = 0.0;
    while (stream >> v) values.push_back(v);
    if (static_cast<int>(values.size()) != dim) {
      fail(path, line_no,
           "embedding for '" + word + "' has dimension " + std::to_string(values.size()) +
               ", expected " + std::to_string(dim));
    }
    std::copy(values.begin(), values.end(),
              table.begin() + static_cast<std::ptrdiff_t>(index) * dim);
    ++loaded;
  }
  return loaded;
}

}  // namespace dualenc
