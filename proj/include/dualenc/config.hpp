#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dualenc {

// Run-wide configuration parsed from a line-oriented `key = value` file.
// Unknown keys are rejected; CLI flags override file values. Relative paths
// in a config file are resolved against the file's directory.
struct RunConfig {
  // data files
  std::string features;
  std::string captions;
  std::string val_features;
  std::string val_captions;
  std::string stopwords;       // optional override of the built-in list
  std::string content_words;   // optional concept whitelist
  std::string lemmas;          // optional word<TAB>lemma table
  std::string word_embeddings; // optional pretrained embedding file

  // encoders
  int frame_dim = 0;  // 0 = infer from the feature file
  int word_embed_dim = 500;
  int gru_hidden = 512;
  int conv_filters = 512;
  std::vector<int> video_kernels{2, 3, 4, 5};
  std::vector<int> text_kernels{2, 3, 4};
  int vocab_min_count = 5;
  int sentence_cap = 64;

  // hybrid space
  int latent_dim = 1536;
  int concept_dim = 512;
  double margin = 0.2;
  double alpha = 0.6;

  // training
  int batch_size = 128;
  double learning_rate = 1e-4;
  int lr_decay_patience = 3;
  double lr_decay_factor = 0.5;
  int early_stop_patience = 10;
  int max_epochs = 50;
  std::uint64_t seed = 0;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_kv_string(const std::string& text);  // no path resolution

  // applies one key; throws on unknown keys or unparseable values
  void set(const std::string& key, const std::string& value);

  std::string to_kv_string() const;
};

// Parses one `key = value` line. Returns nullopt for blank lines and
// '#' comments; throws on malformed lines.
std::optional<std::pair<std::string, std::string>> parse_kv_line(const std::string& line);

}  // namespace dualenc
