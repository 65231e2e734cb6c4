// Command-line surface: train a model, build the offline embedding index,
// answer ad-hoc sentence queries against it, and evaluate retrieval quality.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>
#include <unordered_set>

#include "dualenc/eval.hpp"
#include "dualenc/formats.hpp"
#include "dualenc/index.hpp"
#include "dualenc/pipeline.hpp"

namespace {

using namespace dualenc;

std::string format_epoch_log(const EpochLog& log) {
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer),
                "epoch=%d train_loss=%.17g val_loss=%.17g val_sumr=%.17g lr=%.17g", log.epoch,
                log.train_loss, log.val_loss, log.val_sumr, log.lr);
  return buffer;
}

int cmd_train(const std::string& config_path, const std::string& features_override,
              const std::string& captions_override, const std::string& out_path,
              std::uint64_t seed, bool seed_given, const std::string& resume_path) {
  RunConfig config = RunConfig::from_file(config_path);
  if (!features_override.empty()) config.features = features_override;
  if (!captions_override.empty()) config.captions = captions_override;
  if (seed_given) config.seed = seed;

  TrainSetup setup = prepare_training(std::move(config));
  DualEncodingModel model = DualEncodingModel::create(setup.model_config, setup.config.seed);
  if (!setup.config.word_embeddings.empty()) {
    const int loaded =
        load_word_embeddings(setup.config.word_embeddings, setup.vocab, model.text.embedding);
    std::cout << "loaded pretrained vectors for " << loaded << " of " << setup.vocab.size()
              << " vocabulary words\n";
  }

  Checkpoint resume;
  const Checkpoint* resume_ptr = nullptr;
  if (!resume_path.empty()) {
    resume = load_checkpoint(resume_path);
    resume_ptr = &resume;
  }

  std::ofstream log_file(out_path + ".log", std::ios::trunc);
  if (!log_file) throw std::runtime_error("cannot write training log: " + out_path + ".log");
  auto on_epoch = [&](const EpochLog& log) {
    const std::string line = format_epoch_log(log);
    std::cout << line << "\n";
    log_file << line << "\n";
    log_file.flush();
  };

  TrainResult result =
      run_training(model, setup.train, setup.val, setup.train_config, setup.loss_config,
                   setup.config.alpha, setup.checkpoint_strings(), on_epoch, resume_ptr);
  save_checkpoint(out_path, result.best);
  std::cout << "best validation SumR " << result.best_val_sumr << " at epoch "
            << result.best_epoch << (result.early_stopped ? " (early stop)" : "")
            << "; checkpoint written to " << out_path << "\n";
  return 0;
}

int cmd_encode(const std::string& checkpoint_path, const std::string& features_path,
               const std::string& out_path) {
  LoadedModel loaded = load_model_file(checkpoint_path);
  auto videos = load_feature_file(features_path, loaded.config.frame_dim);

  EmbeddingIndex index;
  index.dim_latent = loaded.config.latent_dim;
  index.dim_concept = loaded.config.concept_dim;
  index.default_alpha = loaded.config.alpha;

  std::vector<HybridEmbedding> embeddings(videos.size());
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min<int>(threads, static_cast<int>(videos.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < videos.size(); ++i) {
      embeddings[i] = loaded.model->embed_video(videos[i]);
    }
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (videos.size() + static_cast<std::size_t>(threads) - 1) /
                              static_cast<std::size_t>(threads);
    for (int t = 0; t < threads; ++t) {
      const std::size_t begin = static_cast<std::size_t>(t) * chunk;
      const std::size_t end = std::min(videos.size(), begin + chunk);
      if (begin >= end) break;
      workers.emplace_back([&, begin, end] {
        for (std::size_t i = begin; i < end; ++i) {
          embeddings[i] = loaded.model->embed_video(videos[i]);
        }
      });
    }
    for (auto& worker : workers) worker.join();
  }
  for (std::size_t i = 0; i < videos.size(); ++i) index.add(videos[i].video_id, embeddings[i]);

  save_index(out_path, index);
  std::cout << "indexed " << index.size() << " videos (" << index.dim_latent << "+"
            << index.dim_concept << " dims) to " << out_path << "\n";
  return 0;
}

int cmd_search(const std::string& index_path, const std::string& checkpoint_path,
               const std::string& query, double alpha, bool alpha_given, int topk) {
  EmbeddingIndex index = load_index(index_path);
  LoadedModel loaded = load_model_file(checkpoint_path);
  if (index.dim_latent != loaded.config.latent_dim ||
      index.dim_concept != loaded.config.concept_dim) {
    throw std::runtime_error("index dims " + std::to_string(index.dim_latent) + "+" +
                             std::to_string(index.dim_concept) +
                             " do not match the checkpoint's " +
                             std::to_string(loaded.config.latent_dim) + "+" +
                             std::to_string(loaded.config.concept_dim));
  }
  TokenSequence tokens = preprocess(query, loaded.vocab, "query", loaded.config.sentence_cap);
  HybridEmbedding embedded = loaded.model->embed_text(tokens);
  const double used_alpha = alpha_given ? alpha : index.default_alpha;
  auto ranked = scan_index(index, embedded, used_alpha, topk);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    std::printf("%zu\t%s\t%.6f\n", i + 1, ranked[i].id.c_str(), ranked[i].score);
  }
  return 0;
}

int cmd_eval(const std::string& index_path, const std::string& checkpoint_path,
             const std::string& captions_path, double alpha, bool alpha_given) {
  EmbeddingIndex index = load_index(index_path);
  LoadedModel loaded = load_model_file(checkpoint_path);
  auto captions = load_caption_file(captions_path);

  std::unordered_set<std::string> indexed(index.ids.begin(), index.ids.end());
  std::string missing;
  for (const auto& record : captions) {
    if (!indexed.count(record.video_id)) {
      if (!missing.empty()) missing += ", ";
      missing += record.caption_id;
    }
  }
  if (!missing.empty()) {
    throw std::runtime_error("captions reference videos absent from the index: " + missing);
  }

  std::vector<EvalItem> sentences;
  std::unordered_map<std::string, std::string> sentence_video;
  sentences.reserve(captions.size());
  for (const auto& record : captions) {
    TokenSequence tokens = preprocess(record.sentence, loaded.vocab, record.caption_id,
                                      loaded.config.sentence_cap);
    sentences.push_back({record.caption_id, loaded.model->embed_text(tokens)});
    sentence_video[record.caption_id] = record.video_id;
  }
  const double used_alpha = alpha_given ? alpha : index.default_alpha;
  BidirectionalReport report =
      evaluate_bidirectional(index.to_eval_items(), sentences, sentence_video, used_alpha);
  std::cout << format_report_table(report);
  std::cout << format_report_kv(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual multi-level encoding for text-video retrieval"};
  app.require_subcommand(1);

  std::string config_path, features, captions, checkpoint, index_path, query, out, resume;
  double alpha = 0.6;
  int topk = 10;
  std::uint64_t seed = 0;

  auto* train = app.add_subcommand("train", "train a model and write the best checkpoint");
  train->add_option("--config", config_path, "key = value configuration file")->required();
  train->add_option("--features", features, "override the training feature file");
  train->add_option("--captions", captions, "override the training caption file");
  auto* seed_opt = train->add_option("--seed", seed, "override the RNG seed");
  train->add_option("--out", out, "checkpoint output path")->default_val("model.ckpt");
  train->add_option("--resume", resume, "continue from a saved checkpoint");

  auto* encode = app.add_subcommand("encode", "embed videos into an offline index");
  encode->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
  encode->add_option("--features", features, "feature file to index")->required();
  encode->add_option("--out", out, "index output path")->default_val("videos.index");

  auto* search = app.add_subcommand("search", "rank indexed videos for a sentence");
  search->add_option("--index", index_path, "offline index")->required();
  search->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
  search->add_option("--query", query, "natural-language query")->required();
  auto* search_alpha = search->add_option("--alpha", alpha, "latent/concept blend");
  search->add_option("--topk", topk, "results to print")->default_val(10);

  auto* eval = app.add_subcommand("eval", "bidirectional retrieval metrics over an index");
  eval->add_option("--index", index_path, "offline index")->required();
  eval->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
  eval->add_option("--captions", captions, "caption file with ground truth ids")->required();
  auto* eval_alpha = eval->add_option("--alpha", alpha, "latent/concept blend");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return cmd_train(config_path, features, captions, out, seed, seed_opt->count() > 0, resume);
    }
    if (encode->parsed()) return cmd_encode(checkpoint, features, out);
    if (search->parsed()) {
      return cmd_search(index_path, checkpoint, query, alpha, search_alpha->count() > 0, topk);
    }
    if (eval->parsed()) {
      return cmd_eval(index_path, checkpoint, captions, alpha, eval_alpha->count() > 0);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
