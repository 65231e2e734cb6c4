#include "dualenc/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

namespace dualenc {

std::vector<std::string> tokenize(const std::string& sentence) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : sentence) {
    if (std::isalnum(c) || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& captions, int min_count) {
  if (min_count < 1) throw std::invalid_argument("vocabulary: min_count must be >= 1");
  std::unordered_map<std::string, long long> counts;
  for (const auto& caption : captions) {
    for (auto& word : tokenize(caption)) ++counts[word];
  }
  std::vector<std::pair<std::string, long long>> kept;
  for (const auto& [word, count] : counts) {
    if (count >= min_count) kept.emplace_back(word, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab;
  vocab.min_count_ = min_count;
  for (auto& [word, count] : kept) {
    vocab.word_to_index_.emplace(word, vocab.size());
    vocab.index_to_word_.push_back(word);
  }
  return vocab;
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words, int min_count) {
  if (words.empty() || words.front() != kUnkToken) {
    throw std::invalid_argument("vocabulary: saved word list must start with " +
                                std::string(kUnkToken));
  }
  Vocabulary vocab;
  vocab.min_count_ = min_count;
  vocab.index_to_word_ = words;
  for (std::size_t i = 1; i < words.size(); ++i) {
    if (!vocab.word_to_index_.emplace(words[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("vocabulary: duplicate word '" + words[i] + "' in saved list");
    }
  }
  return vocab;
}

int Vocabulary::index_of(const std::string& word) const {
  auto it = word_to_index_.find(word);
  return it == word_to_index_.end() ? unk_index() : it->second;
}

TokenSequence preprocess(const std::string& raw, const Vocabulary& vocab,
                         std::string sentence_id, int max_tokens) {
  TokenSequence seq;
  seq.sentence_id = std::move(sentence_id);
  seq.tokens = tokenize(raw);
  if (seq.tokens.empty()) {
    throw std::invalid_argument("preprocess: no tokens left in sentence '" + raw + "'");
  }
  if (max_tokens > 0 && static_cast<int>(seq.tokens.size()) > max_tokens) {
    seq.tokens.resize(static_cast<std::size_t>(max_tokens));
  }
  seq.token_indices.reserve(seq.tokens.size());
  for (const auto& word : seq.tokens) seq.token_indices.push_back(vocab.index_of(word));
  return seq;
}

const std::unordered_set<std::string>& english_stopwords() {
  static const std::unordered_set<std::string> kStopwords = {
      "i",       "me",      "my",      "myself",  "we",       "our",      "ours",
      "ourselves", "you",   "your",    "yours",   "yourself", "yourselves", "he",
      "him",     "his",     "himself", "she",     "her",      "hers",     "herself",
      "it",      "its",     "itself",  "they",    "them",     "their",    "theirs",
      "themselves", "what", "which",   "who",     "whom",     "this",     "that",
      "these",   "those",   "am",      "is",      "are",      "was",      "were",
      "be",      "been",    "being",   "have",    "has",      "had",      "having",
      "do",      "does",    "did",     "doing",   "a",        "an",       "the",
      "and",     "but",     "if",      "or",      "because",  "as",       "until",
      "while",   "of",      "at",      "by",      "for",      "with",     "about",
      "against", "between", "into",    "through", "during",   "before",   "after",
      "above",   "below",   "to",      "from",    "up",       "down",     "in",
      "out",     "on",      "off",     "over",    "under",    "again",    "further",
      "then",    "once",    "here",    "there",   "when",     "where",    "why",
      "how",     "all",     "any",     "both",    "each",     "few",      "more",
      "most",    "other",   "some",    "such",    "no",       "nor",      "not",
      "only",    "own",     "same",    "so",      "than",     "too",      "very",
      "s",       "t",       "can",     "will",    "just",     "don",      "should",
      "now",     "d",       "ll",      "m",       "o",        "re",       "ve",
      "y",       "ain",     "aren",    "couldn",  "didn",     "doesn",    "hadn",
      "hasn",    "haven",   "isn",     "ma",      "mightn",   "mustn",    "needn",
      "shan",    "shouldn", "wasn",    "weren",   "won",      "wouldn"};
  return kStopwords;
}

ConceptVocabulary build_concept_vocab(
    const std::vector<std::string>& captions, int k,
    const std::unordered_set<std::string>& stopwords,
    const std::optional<std::unordered_set<std::string>>& content_words,
    const LemmaTable& lemmas) {
  if (k <= 0) throw std::invalid_argument("concept vocabulary: K must be positive");
  if (captions.empty()) throw std::invalid_argument("concept vocabulary: empty caption corpus");
  // std::map keeps counting deterministic in corpus bytes regardless of hash order
  std::map<std::string, long long> counts;
  for (const auto& caption : captions) {
    for (const auto& token : tokenize(caption)) {
      const std::string& lemma = lemmas.apply(token);
      if (stopwords.count(token) || stopwords.count(lemma)) continue;
      if (content_words && !content_words->count(lemma)) continue;
      ++counts[lemma];
    }
  }
  std::vector<ConceptVocabulary::Entry> entries;
  entries.reserve(counts.size());
  for (const auto& [word, count] : counts) entries.push_back({word, count});
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.frequency > b.frequency;  // stable: equal counts stay lexicographic
  });
  if (static_cast<int>(entries.size()) > k) entries.resize(static_cast<std::size_t>(k));
  ConceptVocabulary vocab;
  vocab.entries = std::move(entries);
  for (std::size_t i = 0; i < vocab.entries.size(); ++i) {
    vocab.index_of.emplace(vocab.entries[i].word, static_cast<int>(i));
  }
  if (vocab.entries.empty()) {
    std::cerr << "warning: concept vocabulary is empty (every word filtered out)\n";
  }
  return vocab;
}

std::vector<double> extract_soft_labels(const std::vector<TokenSequence>& sentences,
                                        const ConceptVocabulary& cvocab,
                                        const LemmaTable& lemmas) {
  if (cvocab.size() == 0) {
    throw std::invalid_argument("soft labels: concept vocabulary is empty");
  }
  if (sentences.empty()) {
    throw std::invalid_argument("soft labels: need at least one sentence");
  }
  std::vector<long long> freq(static_cast<std::size_t>(cvocab.size()), 0);
  for (const auto& sentence : sentences) {
    for (const auto& token : sentence.tokens) {
      auto it = cvocab.index_of.find(lemmas.apply(token));
      if (it != cvocab.index_of.end()) ++freq[static_cast<std::size_t>(it->second)];
    }
  }
  const long long max_freq = *std::max_element(freq.begin(), freq.end());
  std::vector<double> y(freq.size(), 0.0);
  if (max_freq > 0) {
    for (std::size_t i = 0; i < freq.size(); ++i)
      y[i] = static_cast<double>(freq[i]) / static_cast<double>(max_freq);
  }
  return y;
}

std::unordered_set<std::string> load_word_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open word list file: " + path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.insert(line);
  }
  return words;
}

LemmaTable load_lemma_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lemma table file: " + path);
  LemmaTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("lemma table " + path + " line " + std::to_string(line_no) +
                               ": expected word<TAB>lemma");
    }
    table.map[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return table;
}

}  // namespace dualenc
