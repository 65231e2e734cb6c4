#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dualenc {

// A preprocessed sentence: surface tokens plus their retrieval-vocabulary
// indices (out-of-vocabulary words map to the UNK index).
struct TokenSequence {
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::vector<int> token_indices;
};

// Lowercases and splits on anything that is not alphanumeric. May return an
// empty list; preprocess() turns that into an error.
std::vector<std::string> tokenize(const std::string& sentence);

// Retrieval vocabulary: words seen at least min_count times in the training
// captions, ordered by (count desc, word asc); index 0 is the UNK token.
class Vocabulary {
 public:
  static constexpr const char* kUnkToken = "<unk>";

  Vocabulary() : index_to_word_{kUnkToken} {}

  static Vocabulary build(const std::vector<std::string>& captions, int min_count);
  // rebuilds from a saved word list (index order, first entry must be UNK)
  static Vocabulary from_words(const std::vector<std::string>& words, int min_count);

  int size() const { return static_cast<int>(index_to_word_.size()); }
  int unk_index() const { return 0; }
  int index_of(const std::string& word) const;
  const std::string& word_at(int index) const { return index_to_word_.at(static_cast<std::size_t>(index)); }
  const std::vector<std::string>& words() const { return index_to_word_; }
  int min_count() const { return min_count_; }

 private:
  std::unordered_map<std::string, int> word_to_index_;
  std::vector<std::string> index_to_word_;
  int min_count_ = 5;
};

TokenSequence preprocess(const std::string& raw, const Vocabulary& vocab,
                         std::string sentence_id = "", int max_tokens = 64);

// word -> lemma rewrites applied before concept counting; identity when a
// word has no entry
struct LemmaTable {
  std::unordered_map<std::string, std::string> map;

  const std::string& apply(const std::string& word) const {
    auto it = map.find(word);
    return it == map.end() ? word : it->second;
  }
};

struct ConceptVocabulary {
  struct Entry {
    std::string word;
    long long frequency = 0;
  };
  std::vector<Entry> entries;  // frequencies non-increasing, ties broken by word
  std::unordered_map<std::string, int> index_of;

  int size() const { return static_cast<int>(entries.size()); }
};

// Shipped English stopword list (also accepted as a one-word-per-line file
// via the config).
const std::unordered_set<std::string>& english_stopwords();

// Counts lemma-mapped token occurrences over the caption corpus, drops
// stopwords, optionally keeps only the supplied content words, and retains
// the K most frequent (ties broken lexicographically). Emits a warning on an
// empty result.
ConceptVocabulary build_concept_vocab(
    const std::vector<std::string>& captions, int k,
    const std::unordered_set<std::string>& stopwords,
    const std::optional<std::unordered_set<std::string>>& content_words = std::nullopt,
    const LemmaTable& lemmas = {});

// Frequency-based soft labels for one video: y_i = count of concept i across
// the given sentences divided by the maximum concept count; all zeros when no
// concept occurs.
std::vector<double> extract_soft_labels(const std::vector<TokenSequence>& sentences,
                                        const ConceptVocabulary& cvocab,
                                        const LemmaTable& lemmas = {});

// file loaders for the interchange formats: one word per line, and
// word<TAB>lemma per line
std::unordered_set<std::string> load_word_set(const std::string& path);
LemmaTable load_lemma_table(const std::string& path);

}  // namespace dualenc
