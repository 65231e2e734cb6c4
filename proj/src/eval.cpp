#include "dualenc/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace dualenc {

RankingResult rank_candidates(const HybridEmbedding& query, const std::vector<EvalItem>& candidates,
                              double alpha, const std::string& query_id) {
  if (candidates.empty()) {
    throw std::invalid_argument("rank_candidates: empty candidate set for query '" + query_id +
                                "'");
  }
  std::vector<double> lat(candidates.size()), con(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    lat[i] = sim_latent(query.latent, candidates[i].embedding.latent);
    con[i] = sim_concept(query.concept_probs, candidates[i].embedding.concept_probs);
  }
  std::vector<double> fused = fuse_similarities(lat, con, alpha);
  RankingResult result;
  result.query_id = query_id;
  result.ranked.resize(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    result.ranked[i] = {candidates[i].id, fused[i]};
  }
  std::sort(result.ranked.begin(), result.ranked.end(),
            [](const RankedCandidate& a, const RankedCandidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.id < b.id;
            });
  return result;
}

double recall_at_k(const std::vector<int>& ranks, int k) {
  if (k <= 0) throw std::invalid_argument("recall_at_k: K must be positive");
  if (ranks.empty()) throw std::invalid_argument("recall_at_k: no queries");
  std::size_t hits = 0;
  for (int rank : ranks) {
    if (rank <= 0) throw std::invalid_argument("recall_at_k: ranks must be positive");
    if (rank <= k) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double median_rank(std::vector<int> ranks) {
  if (ranks.empty()) throw std::invalid_argument("median_rank: no queries");
  std::sort(ranks.begin(), ranks.end());
  return static_cast<double>(ranks[(ranks.size() - 1) / 2]);
}

double average_precision(const std::vector<int>& relevant_ranks) {
  if (relevant_ranks.empty()) {
    throw std::invalid_argument("average_precision: query has no relevant items");
  }
  std::vector<int> sorted = relevant_ranks;
  std::sort(sorted.begin(), sorted.end());
  double ap = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    ap += static_cast<double>(i + 1) / static_cast<double>(sorted[i]);
  }
  return ap / static_cast<double>(sorted.size());
}

double mean_ap(const std::vector<std::vector<int>>& relevant_ranks_per_query) {
  if (relevant_ranks_per_query.empty()) throw std::invalid_argument("mean_ap: no queries");
  double total = 0.0;
  for (const auto& ranks : relevant_ranks_per_query) total += average_precision(ranks);
  return total / static_cast<double>(relevant_ranks_per_query.size());
}

namespace {

MetricReport metrics_from(const std::vector<int>& first_ranks,
                          const std::vector<std::vector<int>>& relevant_ranks) {
  MetricReport m;
  m.r1 = recall_at_k(first_ranks, 1);
  m.r5 = recall_at_k(first_ranks, 5);
  m.r10 = recall_at_k(first_ranks, 10);
  m.med_r = median_rank(first_ranks);
  m.map = mean_ap(relevant_ranks);
  return m;
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  return out;
}

}  // namespace

BidirectionalReport evaluate_bidirectional(
    const std::vector<EvalItem>& videos, const std::vector<EvalItem>& sentences,
    const std::unordered_map<std::string, std::string>& sentence_video, double alpha) {
  if (videos.empty() || sentences.empty()) {
    throw std::invalid_argument("evaluate_bidirectional: empty video or sentence set");
  }
  std::unordered_map<std::string, std::vector<std::string>> video_sentences;
  for (const auto& v : videos) video_sentences.emplace(v.id, std::vector<std::string>{});

  std::vector<std::string> missing;
  for (const auto& s : sentences) {
    auto gt = sentence_video.find(s.id);
    if (gt == sentence_video.end()) {
      missing.push_back(s.id);
      continue;
    }
    auto vid = video_sentences.find(gt->second);
    if (vid == video_sentences.end()) {
      missing.push_back(s.id);
      continue;
    }
    vid->second.push_back(s.id);
  }
  if (!missing.empty()) {
    throw std::invalid_argument("evaluate_bidirectional: sentences without an indexed video: " +
                                join_ids(missing));
  }
  std::vector<std::string> lonely;
  for (const auto& v : videos) {
    if (video_sentences.at(v.id).empty()) lonely.push_back(v.id);
  }
  if (!lonely.empty()) {
    throw std::invalid_argument("evaluate_bidirectional: videos with no relevant sentence: " +
                                join_ids(lonely));
  }

  // text-to-video: one relevant video per sentence
  std::vector<int> t2v_first;
  std::vector<std::vector<int>> t2v_relevant;
  for (const auto& s : sentences) {
    RankingResult r = rank_candidates(s.embedding, videos, alpha, s.id);
    const std::string& want = sentence_video.at(s.id);
    for (std::size_t pos = 0; pos < r.ranked.size(); ++pos) {
      if (r.ranked[pos].id == want) {
        r.rank_of_first_relevant = static_cast<int>(pos + 1);
        t2v_first.push_back(static_cast<int>(pos + 1));
        t2v_relevant.push_back({static_cast<int>(pos + 1)});
        break;
      }
    }
  }

  // video-to-text: every caption of the video is relevant
  std::vector<int> v2t_first;
  std::vector<std::vector<int>> v2t_relevant;
  for (const auto& v : videos) {
    RankingResult r = rank_candidates(v.embedding, sentences, alpha, v.id);
    const auto& relevant_ids = video_sentences.at(v.id);
    std::vector<int> ranks;
    for (std::size_t pos = 0; pos < r.ranked.size(); ++pos) {
      for (const auto& id : relevant_ids) {
        if (r.ranked[pos].id == id) {
          ranks.push_back(static_cast<int>(pos + 1));
          break;
        }
      }
    }
    r.rank_of_first_relevant = *std::min_element(ranks.begin(), ranks.end());
    v2t_first.push_back(*r.rank_of_first_relevant);
    v2t_relevant.push_back(std::move(ranks));
  }

  BidirectionalReport report;
  report.t2v = metrics_from(t2v_first, t2v_relevant);
  report.v2t = metrics_from(v2t_first, v2t_relevant);
  report.sum_recalls = report.t2v.r1 + report.t2v.r5 + report.t2v.r10 + report.v2t.r1 +
                       report.v2t.r5 + report.v2t.r10;
  return report;
}

std::string format_report_table(const BidirectionalReport& report) {
  char buffer[256];
  std::string out = "direction      R@1     R@5    R@10   Med r     mAP\n";
  auto line = [&](const char* name, const MetricReport& m) {
    std::snprintf(buffer, sizeof(buffer), "%-9s %8.2f %7.2f %7.2f %7.0f %7.4f\n", name, m.r1,
                  m.r5, m.r10, m.med_r, m.map);
    out += buffer;
  };
  line("t2v", report.t2v);
  line("v2t", report.v2t);
  std::snprintf(buffer, sizeof(buffer), "SumR %.2f\n", report.sum_recalls);
  out += buffer;
  return out;
}

std::string format_report_kv(const BidirectionalReport& report) {
  char buffer[128];
  std::string out;
  auto emit = [&](const char* key, double value) {
    std::snprintf(buffer, sizeof(buffer), "%s = %.17g\n", key, value);
    out += buffer;
  };
  emit("t2v.r1", report.t2v.r1);
  emit("t2v.r5", report.t2v.r5);
  emit("t2v.r10", report.t2v.r10);
  emit("t2v.med_r", report.t2v.med_r);
  emit("t2v.map", report.t2v.map);
  emit("v2t.r1", report.v2t.r1);
  emit("v2t.r5", report.v2t.r5);
  emit("v2t.r10", report.v2t.r10);
  emit("v2t.med_r", report.v2t.med_r);
  emit("v2t.map", report.v2t.map);
  emit("sumr", report.sum_recalls);
  return out;
}

}  // namespace dualenc
