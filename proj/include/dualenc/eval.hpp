#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualenc/hybrid.hpp"

namespace dualenc {

struct RankedCandidate {
  std::string id;
  double score = 0.0;
};

struct RankingResult {
  std::string query_id;
  std::vector<RankedCandidate> ranked;  // scores non-increasing, ties by id
  std::optional<int> rank_of_first_relevant;  // 1-based, filled during evaluation
};

struct EvalItem {
  std::string id;
  HybridEmbedding embedding;
};

// Exact scoring of every candidate through fuse_similarities, then a stable
// descending sort with candidate-id tie-breaks.
RankingResult rank_candidates(const HybridEmbedding& query, const std::vector<EvalItem>& candidates,
                              double alpha, const std::string& query_id = "");

// percentage of queries whose first relevant item landed in the top K
double recall_at_k(const std::vector<int>& ranks, int k);

// lower middle value for even counts
double median_rank(std::vector<int> ranks);

// AP per query over the (ascending) ranks of its relevant items; mAP averages
// over queries
double average_precision(const std::vector<int>& relevant_ranks);
double mean_ap(const std::vector<std::vector<int>>& relevant_ranks_per_query);

struct MetricReport {
  double r1 = 0, r5 = 0, r10 = 0;
  double med_r = 0;
  double map = 0;
};

struct BidirectionalReport {
  MetricReport t2v;  // sentences querying videos
  MetricReport v2t;  // videos querying sentences
  double sum_recalls = 0;
};

// Ranks every sentence against all videos and every video against all
// sentences. sentence_video maps each sentence id to its relevant video id;
// videos with no sentence and sentences with an unknown video are reported as
// errors listing the offending ids.
BidirectionalReport evaluate_bidirectional(
    const std::vector<EvalItem>& videos, const std::vector<EvalItem>& sentences,
    const std::unordered_map<std::string, std::string>& sentence_video, double alpha);

// aligned plain-text table and machine-readable key=value lines
std::string format_report_table(const BidirectionalReport& report);
std::string format_report_kv(const BidirectionalReport& report);

}  // namespace dualenc
