#pragma once

#include <memory>
#include <string>

#include "dualenc/checkpoint.hpp"
#include "dualenc/config.hpp"
#include "dualenc/dataset.hpp"
#include "dualenc/model.hpp"
#include "dualenc/trainer.hpp"

namespace dualenc {

// Everything cmd_train needs, assembled from the configured files: both
// datasets, the vocabularies, and the model dimensions.
struct TrainSetup {
  RunConfig config;  // frame_dim resolved
  Vocabulary vocab;
  ConceptVocabulary cvocab;
  LemmaTable lemmas;
  TrainingDataset train;
  TrainingDataset val;
  ModelConfig model_config;
  TrainConfig train_config;
  LossConfig loss_config;

  // vocabulary / concept vocabulary / lemma / config sections embedded into
  // every checkpoint so that encode/search/eval are self-contained
  std::map<std::string, std::string> checkpoint_strings() const;
};

TrainSetup prepare_training(RunConfig config);

ModelConfig model_config_from(const RunConfig& config, int vocab_size);

// A checkpoint rehydrated into a ready-to-run model plus the text machinery
// needed to encode ad-hoc queries.
struct LoadedModel {
  RunConfig config;
  Vocabulary vocab;
  ConceptVocabulary cvocab;
  LemmaTable lemmas;
  std::unique_ptr<DualEncodingModel> model;
};

LoadedModel load_model(const Checkpoint& checkpoint);
LoadedModel load_model_file(const std::string& checkpoint_path);

// serialization helpers for the checkpoint string sections
std::string serialize_vocab(const Vocabulary& vocab);
Vocabulary parse_vocab(const std::string& text, int min_count);
std::string serialize_concept_vocab(const ConceptVocabulary& cvocab);
ConceptVocabulary parse_concept_vocab(const std::string& text);
std::string serialize_lemmas(const LemmaTable& lemmas);
LemmaTable parse_lemmas(const std::string& text);

}  // namespace dualenc
