#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rollcall/corpus.hpp"
#include "rollcall/vocab.hpp"

namespace rollcall {

struct Topic {
  std::string label;
  std::vector<double> word_dist;  // simplex over the vocabulary
};

struct TopicModel {
  std::vector<Topic> topics;
  double alpha = 1.0;  // symmetric Dirichlet concentration
  int K() const { return int(topics.size()); }
  std::vector<std::string> labels() const;
};

struct IssueMixture {
  std::string bill_id;
  std::vector<double> theta;
};

// Per word type, posterior topic-assignment probabilities.
struct WordAssignmentPosterior {
  std::vector<int> word_index;              // vocabulary indices present in the doc
  std::vector<std::vector<double>> probs;   // rows parallel to word_index, each sums to 1
};

struct MixtureInference {
  IssueMixture mixture;
  WordAssignmentPosterior assignments;
  double objective = 0;  // document variational bound at the solution
  int iterations = 0;
};

TopicModel build_labeled_topics(const std::vector<BillDoc>& bills, const Vocabulary& vocab,
                                int min_label_count = 25, double pseudocount = 0.01);

TopicModel smooth_topics(const TopicModel& model, const std::vector<BillDoc>& bills,
                         const Vocabulary& vocab, int iterations = 2,
                         double pseudocount = 0.01);

MixtureInference infer_mixture_full(const BillDoc& doc, const TopicModel& model,
                                    const Vocabulary& vocab, double tol = 1e-5,
                                    int max_iter = 200);

IssueMixture infer_mixture(const BillDoc& doc, const TopicModel& model, const Vocabulary& vocab,
                           double tol = 1e-5, int max_iter = 200);

std::vector<IssueMixture> infer_all_mixtures(const std::vector<BillDoc>& bills,
                                             const TopicModel& model, const Vocabulary& vocab,
                                             double tol = 1e-5, int max_iter = 200,
                                             int threads = 1);

std::vector<IssueMixture> encode_direct_labels(const std::vector<BillDoc>& bills,
                                               const std::vector<std::string>& labels);

std::vector<IssueMixture> permute_mixtures(const std::vector<IssueMixture>& mixtures,
                                           uint64_t seed);

struct LdaFit {
  TopicModel model;
  bool converged = false;
  int iterations = 0;
  double objective = 0;
};

LdaFit fit_unsupervised_lda(const std::vector<BillDoc>& bills, const Vocabulary& vocab, int K,
                            uint64_t seed, int max_iter = 100, double tol = 1e-5,
                            double alpha = -1.0, int threads = 1);

}  // namespace rollcall
