#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rollcall/corpus.hpp"

namespace rollcall {

struct PhraseStats {
  std::string phrase;       // 1..5 space-joined tokens
  long long corpus_count = 0;
  long long doc_count = 0;
  double corpus_fraction = 0;
};

// Fixed feature order; names are the keys in VocabModel::weights.
const std::vector<std::string>& feature_names();

struct PhraseFeatures {
  std::string phrase;
  std::vector<double> values;  // parallel to feature_names()
};

struct AnchorEntry {
  double frequency = 0;       // 0 and absent are distinct: presence is its own feature
  double expected_count = 0;  // independence-model expectation for the test statistic
};

using AnchorTable = std::unordered_map<std::string, AnchorEntry>;

PhraseFeatures compute_features(const PhraseStats& stats, const AnchorTable& anchors);

struct VocabModel {
  std::map<std::string, double> weights;
  double intercept = 0;
  double l2_penalty = 1.0;
};

struct Vocabulary {
  std::vector<std::string> phrases;  // rank order
  std::unordered_map<std::string, int> index;
};

std::vector<PhraseStats> extract_phrases(const std::vector<BillDoc>& bills, int max_len = 5,
                                         int threads = 1);

std::vector<PhraseStats> filter_phrases(const std::vector<PhraseStats>& stats, long long n_bills,
                                        double max_doc_frac = 0.10, long long min_docs = 4,
                                        double min_corpus_frac = 1e-5);

VocabModel train_phrase_classifier(const std::vector<PhraseFeatures>& features,
                                   const std::set<std::string>& bad_phrases, double l2_penalty,
                                   int max_iter = 200, double tol = 1e-6);

double phrase_score(const VocabModel& model, const PhraseFeatures& f);

Vocabulary select_vocabulary(const VocabModel& model, const std::vector<PhraseFeatures>& features,
                             int size = 5000);

Vocabulary vocabulary_from_phrases(std::vector<std::string> phrases);

// Counts of each vocabulary phrase's occurrences (overlaps included),
// returned as (index, count) sorted by index.
std::vector<std::pair<int, int>> bag_of_phrases(const BillDoc& doc, const Vocabulary& vocab);

void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);
AnchorTable load_anchor_table(const std::string& path);
std::set<std::string> load_phrase_list(const std::string& path);

}  // namespace rollcall
