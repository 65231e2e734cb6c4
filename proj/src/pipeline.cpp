#include "dualenc/pipeline.hpp"

#include <sstream>
#include <stdexcept>

#include "dualenc/formats.hpp"

namespace dualenc {

ModelConfig model_config_from(const RunConfig& config, int vocab_size) {
  ModelConfig model_config;
  model_config.encoder.frame_dim = config.frame_dim;
  model_config.encoder.vocab_size = vocab_size;
  model_config.encoder.word_embed_dim = config.word_embed_dim;
  model_config.encoder.gru_hidden = config.gru_hidden;
  model_config.encoder.conv_filters = config.conv_filters;
  model_config.encoder.video_kernels = config.video_kernels;
  model_config.encoder.text_kernels = config.text_kernels;
  model_config.latent_dim = config.latent_dim;
  model_config.concept_dim = config.concept_dim;
  return model_config;
}

TrainSetup prepare_training(RunConfig config) {
  if (config.features.empty() || config.captions.empty()) {
    throw std::invalid_argument("config must name a feature file and a caption file");
  }
  if (config.val_features.empty() || config.val_captions.empty()) {
    throw std::invalid_argument("config must name a validation feature and caption file");
  }
  TrainSetup setup;

  auto train_videos = load_feature_file(config.features, config.frame_dim);
  config.frame_dim = train_videos.front().frame_dim;
  auto train_captions = load_caption_file(config.captions);

  std::vector<std::string> sentences;
  sentences.reserve(train_captions.size());
  for (const auto& record : train_captions) sentences.push_back(record.sentence);
  setup.vocab = Vocabulary::build(sentences, config.vocab_min_count);

  auto stopwords = config.stopwords.empty() ? english_stopwords() : load_word_set(config.stopwords);
  std::optional<std::unordered_set<std::string>> content_words;
  if (!config.content_words.empty()) content_words = load_word_set(config.content_words);
  if (!config.lemmas.empty()) setup.lemmas = load_lemma_table(config.lemmas);
  setup.cvocab =
      build_concept_vocab(sentences, config.concept_dim, stopwords, content_words, setup.lemmas);
  if (setup.cvocab.size() == 0) {
    throw std::invalid_argument("concept vocabulary is empty; cannot build concept labels");
  }

  setup.train = TrainingDataset::assemble(std::move(train_videos), train_captions, setup.vocab,
                                          setup.cvocab, setup.lemmas, config.sentence_cap,
                                          config.concept_dim);
  auto val_videos = load_feature_file(config.val_features, config.frame_dim);
  auto val_captions = load_caption_file(config.val_captions);
  setup.val = TrainingDataset::assemble(std::move(val_videos), val_captions, setup.vocab,
                                        setup.cvocab, setup.lemmas, config.sentence_cap,
                                        config.concept_dim);

  setup.model_config = model_config_from(config, setup.vocab.size());
  setup.train_config.batch_size = config.batch_size;
  setup.train_config.initial_lr = config.learning_rate;
  setup.train_config.lr_decay_patience = config.lr_decay_patience;
  setup.train_config.lr_decay_factor = config.lr_decay_factor;
  setup.train_config.early_stop_patience = config.early_stop_patience;
  setup.train_config.max_epochs = config.max_epochs;
  setup.train_config.seed = config.seed;
  setup.loss_config.margin = config.margin;
  setup.loss_config.alpha = config.alpha;
  setup.config = std::move(config);
  return setup;
}

std::map<std::string, std::string> TrainSetup::checkpoint_strings() const {
  return {
      {"config", config.to_kv_string()},
      {"vocab.words", serialize_vocab(vocab)},
      {"concept_vocab", serialize_concept_vocab(cvocab)},
      {"lemmas", serialize_lemmas(lemmas)},
  };
}

LoadedModel load_model(const Checkpoint& checkpoint) {
  LoadedModel loaded;
  loaded.config = RunConfig::from_kv_string(checkpoint.string_at("config"));
  loaded.vocab = parse_vocab(checkpoint.string_at("vocab.words"), loaded.config.vocab_min_count);
  loaded.cvocab = parse_concept_vocab(checkpoint.string_at("concept_vocab"));
  loaded.lemmas = parse_lemmas(checkpoint.string_at("lemmas"));
  ModelConfig model_config = model_config_from(loaded.config, loaded.vocab.size());
  loaded.model = std::make_unique<DualEncodingModel>(
      DualEncodingModel::create(model_config, loaded.config.seed));
  load_model_tensors(checkpoint, loaded.model->params);
  return loaded;
}

LoadedModel load_model_file(const std::string& checkpoint_path) {
  return load_model(load_checkpoint(checkpoint_path));
}

std::string serialize_vocab(const Vocabulary& vocab) {
  std::string out;
  for (const auto& word : vocab.words()) {
    out += word;
    out += '\n';
  }
  return out;
}

Vocabulary parse_vocab(const std::string& text, int min_count) {
  std::istringstream in(text);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) words.push_back(line);
  }
  return Vocabulary::from_words(words, min_count);
}

std::string serialize_concept_vocab(const ConceptVocabulary& cvocab) {
  std::string out;
  for (const auto& entry : cvocab.entries) {
    out += entry.word;
    out += '\t';
    out += std::to_string(entry.frequency);
    out += '\n';
  }
  return out;
}

ConceptVocabulary parse_concept_vocab(const std::string& text) {
  ConceptVocabulary cvocab;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("concept vocabulary section: expected word<TAB>frequency");
    }
    ConceptVocabulary::Entry entry;
    entry.word = line.substr(0, tab);
    entry.frequency = std::stoll(line.substr(tab + 1));
    cvocab.index_of.emplace(entry.word, cvocab.size());
    cvocab.entries.push_back(std::move(entry));
  }
  return cvocab;
}

std::string serialize_lemmas(const LemmaTable& lemmas) {
  // sorted for byte-stable checkpoints
  std::map<std::string, std::string> sorted(lemmas.map.begin(), lemmas.map.end());
  std::string out;
  for (const auto& [word, lemma] : sorted) {
    out += word;
    out += '\t';
    out += lemma;
    out += '\n';
  }
  return out;
}

LemmaTable parse_lemmas(const std::string& text) {
  LemmaTable table;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("lemma section: expected word<TAB>lemma");
    }
    table.map[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return table;
}

}  // namespace dualenc
