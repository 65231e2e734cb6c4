#include "dualenc/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "wire.hpp"

namespace dualenc {

void EmbeddingIndex::add(const std::string& id, const HybridEmbedding& embedding) {
  if (static_cast<int>(embedding.latent.size()) != dim_latent ||
      static_cast<int>(embedding.concept_probs.size()) != dim_concept) {
    throw std::invalid_argument("index: embedding for '" + id + "' has dims " +
                                std::to_string(embedding.latent.size()) + "+" +
                                std::to_string(embedding.concept_probs.size()) +
                                ", index expects " + std::to_string(dim_latent) + "+" +
                                std::to_string(dim_concept));
  }
  ids.push_back(id);
  for (double v : embedding.latent) latent.push_back(static_cast<float>(v));
  for (double v : embedding.concept_probs) concepts.push_back(static_cast<float>(v));
}

HybridEmbedding EmbeddingIndex::embedding_at(std::size_t position) const {
  HybridEmbedding out;
  out.latent.assign(latent.begin() + static_cast<std::ptrdiff_t>(position * dim_latent),
                    latent.begin() + static_cast<std::ptrdiff_t>((position + 1) * dim_latent));
  out.concept_probs.assign(
      concepts.begin() + static_cast<std::ptrdiff_t>(position * dim_concept),
      concepts.begin() + static_cast<std::ptrdiff_t>((position + 1) * dim_concept));
  return out;
}

std::vector<EvalItem> EmbeddingIndex::to_eval_items() const {
  std::vector<EvalItem> items;
  items.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) items.push_back({ids[i], embedding_at(i)});
  return items;
}

void save_index(const std::string& path, const EmbeddingIndex& index) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write index file: " + path);
  char header[96];
  std::snprintf(header, sizeof(header), "DUALENC-INDEX %u %d %d\n", EmbeddingIndex::kVersion,
                index.dim_latent, index.dim_concept);
  out << header;
  std::snprintf(header, sizeof(header), "alpha %.17g\n", index.default_alpha);
  out << header;
  out << "count " << index.ids.size() << "\n";
  for (std::size_t i = 0; i < index.ids.size(); ++i) {
    wire::put_string(out, index.ids[i]);
    for (int j = 0; j < index.dim_latent; ++j) {
      wire::put_f32(out, index.latent[i * static_cast<std::size_t>(index.dim_latent) + j]);
    }
    for (int j = 0; j < index.dim_concept; ++j) {
      wire::put_f32(out, index.concepts[i * static_cast<std::size_t>(index.dim_concept) + j]);
    }
  }
  if (!out) throw std::runtime_error("write error on index file: " + path);
}

EmbeddingIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open index file: " + path);
  std::string magic;
  std::uint32_t version = 0;
  EmbeddingIndex index;
  in >> magic >> version >> index.dim_latent >> index.dim_concept;
  if (!in || magic != "DUALENC-INDEX") {
    throw std::runtime_error("not an index file (bad header): " + path);
  }
  if (version != EmbeddingIndex::kVersion) {
    throw std::runtime_error("index version mismatch in " + path + ": file has version " +
                             std::to_string(version));
  }
  std::string key;
  std::uint64_t count = 0;
  in >> key >> index.default_alpha;
  if (!in || key != "alpha") throw std::runtime_error("index header missing alpha: " + path);
  in >> key >> count;
  if (!in || key != "count") throw std::runtime_error("index header missing count: " + path);
  in.get();  // newline

  index.ids.reserve(count);
  index.latent.reserve(count * static_cast<std::size_t>(index.dim_latent));
  index.concepts.reserve(count * static_cast<std::size_t>(index.dim_concept));
  for (std::uint64_t i = 0; i < count; ++i) {
    index.ids.push_back(wire::get_string(in, "record id"));
    for (int j = 0; j < index.dim_latent; ++j) {
      index.latent.push_back(wire::get_f32(in, "latent vector"));
    }
    for (int j = 0; j < index.dim_concept; ++j) {
      index.concepts.push_back(wire::get_f32(in, "concept vector"));
    }
  }
  return index;
}

namespace {

void score_range(const EmbeddingIndex& index, const HybridEmbedding& query, std::size_t begin,
                 std::size_t end, std::vector<double>& lat_scores,
                 std::vector<double>& con_scores) {
  const int dl = index.dim_latent, dc = index.dim_concept;
  double query_norm = 0.0;
  for (double v : query.latent) query_norm += v * v;
  query_norm = std::sqrt(query_norm);
  if (query_norm == 0.0) {
    throw std::invalid_argument("scan_index: query latent vector is zero");
  }
  for (std::size_t i = begin; i < end; ++i) {
    const float* lat = index.latent.data() + i * static_cast<std::size_t>(dl);
    double dot = 0.0, norm = 0.0;
    for (int j = 0; j < dl; ++j) {
      dot += query.latent[static_cast<std::size_t>(j)] * lat[j];
      norm += static_cast<double>(lat[j]) * lat[j];
    }
    if (norm == 0.0) {
      throw std::invalid_argument("scan_index: record '" + index.ids[i] +
                                  "' has a zero latent vector");
    }
    lat_scores[i] = dot / (query_norm * std::sqrt(norm));

    const float* con = index.concepts.data() + i * static_cast<std::size_t>(dc);
    double mins = 0.0, maxs = 0.0;
    for (int j = 0; j < dc; ++j) {
      const double a = query.concept_probs[static_cast<std::size_t>(j)];
      const double b = con[j];
      mins += std::min(a, b);
      maxs += std::max(a, b);
    }
    con_scores[i] = maxs == 0.0 ? 0.0 : mins / maxs;
  }
}

}  // namespace

std::vector<RankedCandidate> scan_index(const EmbeddingIndex& index, const HybridEmbedding& query,
                                        double alpha, int top_k, int num_threads) {
  if (index.size() == 0) throw std::invalid_argument("scan_index: index is empty");
  if (static_cast<int>(query.latent.size()) != index.dim_latent ||
      static_cast<int>(query.concept_probs.size()) != index.dim_concept) {
    throw std::invalid_argument("scan_index: query dims " + std::to_string(query.latent.size()) +
                                "+" + std::to_string(query.concept_probs.size()) +
                                " do not match index dims " + std::to_string(index.dim_latent) +
                                "+" + std::to_string(index.dim_concept));
  }
  const std::size_t n = index.size();
  std::vector<double> lat_scores(n), con_scores(n);
  int threads = num_threads > 0 ? num_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min<int>(threads, static_cast<int>(n));
  if (threads == 1) {
    score_range(index, query, 0, n, lat_scores, con_scores);
  } else {
    std::vector<std::thread> workers;
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t chunk = (n + static_cast<std::size_t>(threads) - 1) /
                              static_cast<std::size_t>(threads);
    for (int t = 0; t < threads; ++t) {
      const std::size_t begin = static_cast<std::size_t>(t) * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back([&, begin, end] {
        try {
          score_range(index, query, begin, end, lat_scores, con_scores);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& worker : workers) worker.join();
    if (error) std::rethrow_exception(error);
  }

  std::vector<double> fused = fuse_similarities(lat_scores, con_scores, alpha);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (fused[a] != fused[b]) return fused[a] > fused[b];
    return index.ids[a] < index.ids[b];
  });
  std::size_t keep = top_k <= 0 ? n : std::min<std::size_t>(static_cast<std::size_t>(top_k), n);
  std::vector<RankedCandidate> ranked;
  ranked.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) ranked.push_back({index.ids[order[i]], fused[order[i]]});
  return ranked;
}

}  // namespace dualenc
