#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualenc/eval.hpp"
#include "dualenc/hybrid.hpp"

namespace dualenc {

// Offline store of per-video hybrid embeddings, scanned exactly at query
// time. On disk: a text header (`DUALENC-INDEX 1 <dim_lat> <dim_con>`, the
// default alpha, the record count) followed by little-endian records of
// (id, float32 latent vector, float32 concept vector). Vectors are kept
// packed as float32 in memory as well; all scoring arithmetic is double.
struct EmbeddingIndex {
  static constexpr std::uint32_t kVersion = 1;

  int dim_latent = 0;
  int dim_concept = 0;
  double default_alpha = 0.6;
  std::vector<std::string> ids;
  std::vector<float> latent;    // ids.size() * dim_latent
  std::vector<float> concepts;  // ids.size() * dim_concept

  std::size_t size() const { return ids.size(); }
  void add(const std::string& id, const HybridEmbedding& embedding);
  HybridEmbedding embedding_at(std::size_t position) const;
  std::vector<EvalItem> to_eval_items() const;
};

void save_index(const std::string& path, const EmbeddingIndex& index);
EmbeddingIndex load_index(const std::string& path);

// Exact scan: scores every record against the query, min-max fuses, and
// returns the top_k best (all records when top_k <= 0 or past the end),
// sorted by descending score with id tie-breaks. The raw-score pass is
// sharded across threads (num_threads <= 0 picks the hardware count); the
// merge is deterministic.
std::vector<RankedCandidate> scan_index(const EmbeddingIndex& index, const HybridEmbedding& query,
                                        double alpha, int top_k, int num_threads = 0);

}  // namespace dualenc
