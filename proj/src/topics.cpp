#include "rollcall/topics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>

#include "rollcall/errors.hpp"
#include "rollcall/par.hpp"
#include "rollcall/rng.hpp"

namespace rollcall {

namespace {

using boost::math::digamma;

using DocCounts = std::vector<std::pair<int, int>>;

std::vector<DocCounts> all_doc_counts(const std::vector<BillDoc>& bills, const Vocabulary& vocab,
                                      int threads) {
  std::vector<DocCounts> out(bills.size());
  parallel_for(bills.size(), threads,
               [&](size_t i) { out[i] = bag_of_phrases(bills[i], vocab); });
  return out;
}

void normalize_with_pseudocount(std::vector<double>& counts, double pseudocount) {
  double total = 0;
  for (double& c : counts) {
    c += pseudocount;
    total += c;
  }
  for (double& c : counts) c /= total;
}

// Coordinate ascent on one document's (gamma, phi) at fixed topics.
// Returns the document bound including the per-type assignment entropy.
struct DocResult {
  std::vector<double> gamma;
  std::vector<std::vector<double>> phi;  // per word type
  double bound = 0;
  int iterations = 0;
};

DocResult doc_inference(const DocCounts& counts, const TopicModel& model, double tol,
                        int max_iter) {
  int K = model.K();
  double alpha = model.alpha;
  size_t W = counts.size();
  double total = 0;
  for (const auto& [w, c] : counts) total += c;

  std::vector<std::vector<double>> logbeta(W, std::vector<double>(K));
  for (size_t i = 0; i < W; ++i)
    for (int k = 0; k < K; ++k)
      logbeta[i][k] = std::log(model.topics[k].word_dist[counts[i].first]);

  DocResult r;
  r.gamma.assign(K, alpha + total / K);
  r.phi.assign(W, std::vector<double>(K, 1.0 / K));

  auto bound_of = [&]() {
    double g0 = std::accumulate(r.gamma.begin(), r.gamma.end(), 0.0);
    double psi0 = digamma(g0);
    double b = std::lgamma(K * alpha) - K * std::lgamma(alpha);
    b -= std::lgamma(g0);
    for (int k = 0; k < K; ++k) {
      double psik = digamma(r.gamma[k]) - psi0;
      b += (alpha - r.gamma[k]) * psik + std::lgamma(r.gamma[k]);
    }
    for (size_t i = 0; i < W; ++i) {
      double c = counts[i].second;
      for (int k = 0; k < K; ++k) {
        double p = r.phi[i][k];
        if (p <= 0) continue;
        double psik = digamma(r.gamma[k]) - psi0;
        b += c * p * (psik + logbeta[i][k] - std::log(p));
      }
    }
    return b;
  };

  double prev = -HUGE_VAL;
  for (int it = 0; it < max_iter; ++it) {
    double g0 = std::accumulate(r.gamma.begin(), r.gamma.end(), 0.0);
    std::vector<double> e_logtheta(K);
    for (int k = 0; k < K; ++k) e_logtheta[k] = digamma(r.gamma[k]) - digamma(g0);

    std::vector<double> new_gamma(K, alpha);
    for (size_t i = 0; i < W; ++i) {
      double mx = -HUGE_VAL;
      for (int k = 0; k < K; ++k) {
        r.phi[i][k] = e_logtheta[k] + logbeta[i][k];
        mx = std::max(mx, r.phi[i][k]);
      }
      double z = 0;
      for (int k = 0; k < K; ++k) {
        r.phi[i][k] = std::exp(r.phi[i][k] - mx);
        z += r.phi[i][k];
      }
      for (int k = 0; k < K; ++k) {
        r.phi[i][k] /= z;
        new_gamma[k] += counts[i].second * r.phi[i][k];
      }
    }
    r.gamma = std::move(new_gamma);
    r.iterations = it + 1;

    double b = bound_of();
    if (prev != -HUGE_VAL && std::fabs(b - prev) <= tol * std::fabs(prev)) {
      r.bound = b;
      return r;
    }
    prev = b;
  }
  r.bound = prev;
  return r;
}

TopicModel em_pass(const TopicModel& model, const std::vector<DocCounts>& counts, int V,
                   double pseudocount, double tol, int max_iter, int threads,
                   double* objective) {
  int K = model.K();
  std::vector<DocResult> results(counts.size());
  parallel_for(counts.size(), threads, [&](size_t d) {
    if (counts[d].empty()) return;
    results[d] = doc_inference(counts[d], model, tol, max_iter);
  });

  double obj = 0;
  std::vector<std::vector<double>> acc(K, std::vector<double>(V, 0.0));
  for (size_t d = 0; d < counts.size(); ++d) {
    if (counts[d].empty()) continue;
    obj += results[d].bound;
    for (size_t i = 0; i < counts[d].size(); ++i) {
      auto [w, c] = counts[d][i];
      for (int k = 0; k < K; ++k) acc[k][w] += c * results[d].phi[i][k];
    }
  }

  TopicModel out;
  out.alpha = model.alpha;
  out.topics.resize(K);
  for (int k = 0; k < K; ++k) {
    out.topics[k].label = model.topics[k].label;
    normalize_with_pseudocount(acc[k], pseudocount);
    out.topics[k].word_dist = std::move(acc[k]);
  }
  if (objective) {
    // MAP objective: document bounds plus the smoothing prior on topics,
    // which is what the pseudocount M-step maximizes
    for (int k = 0; k < K; ++k)
      for (int w = 0; w < V; ++w) obj += pseudocount * std::log(out.topics[k].word_dist[w]);
    *objective = obj;
  }
  return out;
}

}  // namespace

std::vector<std::string> TopicModel::labels() const {
  std::vector<std::string> out;
  out.reserve(topics.size());
  for (const auto& t : topics) out.push_back(t.label);
  return out;
}

TopicModel build_labeled_topics(const std::vector<BillDoc>& bills, const Vocabulary& vocab,
                                int min_label_count, double pseudocount) {
  std::map<std::string, int> label_bills;
  for (const auto& b : bills)
    for (const auto& l : b.labels) ++label_bills[l];

  std::vector<std::string> kept;
  for (const auto& [l, n] : label_bills)
    if (n >= min_label_count) kept.push_back(l);
  if (kept.empty()) throw EmptyModelError("no label reaches the bill-count threshold");

  int V = int(vocab.phrases.size());
  TopicModel m;
  m.alpha = 1.0 / double(kept.size());
  m.topics.resize(kept.size());
  std::map<std::string, int> topic_of;
  for (size_t k = 0; k < kept.size(); ++k) {
    m.topics[k].label = kept[k];
    m.topics[k].word_dist.assign(V, 0.0);
    topic_of[kept[k]] = int(k);
  }

  for (const auto& b : bills) {
    auto counts = bag_of_phrases(b, vocab);
    for (const auto& l : b.labels) {
      auto it = topic_of.find(l);
      if (it == topic_of.end()) continue;
      auto& dist = m.topics[it->second].word_dist;
      for (const auto& [w, c] : counts) dist[w] += c;
    }
  }
  for (auto& t : m.topics) normalize_with_pseudocount(t.word_dist, pseudocount);
  return m;
}

TopicModel smooth_topics(const TopicModel& model, const std::vector<BillDoc>& bills,
                         const Vocabulary& vocab, int iterations, double pseudocount) {
  if (iterations < 0) throw InvalidArgument("iterations must be nonnegative");
  if (model.topics.empty()) throw EmptyModelError("cannot smooth an empty topic model");
  TopicModel cur = model;
  if (iterations == 0) return cur;
  auto counts = all_doc_counts(bills, vocab, 1);
  int V = int(vocab.phrases.size());
  for (int it = 0; it < iterations; ++it)
    cur = em_pass(cur, counts, V, pseudocount, 1e-5, 200, 1, nullptr);
  return cur;
}

MixtureInference infer_mixture_full(const BillDoc& doc, const TopicModel& model,
                                    const Vocabulary& vocab, double tol, int max_iter) {
  if (model.topics.empty()) throw EmptyModelError("topic model has no topics");
  auto counts = bag_of_phrases(doc, vocab);
  if (counts.empty())
    throw EmptyDocumentError("bill '" + doc.id + "' has no in-vocabulary content");
  auto r = doc_inference(counts, model, tol, max_iter);

  MixtureInference out;
  out.mixture.bill_id = doc.id;
  double g0 = std::accumulate(r.gamma.begin(), r.gamma.end(), 0.0);
  out.mixture.theta.resize(model.K());
  for (int k = 0; k < model.K(); ++k) out.mixture.theta[k] = r.gamma[k] / g0;
  for (const auto& [w, c] : counts) out.assignments.word_index.push_back(w);
  out.assignments.probs = std::move(r.phi);
  out.objective = r.bound;
  out.iterations = r.iterations;
  return out;
}

IssueMixture infer_mixture(const BillDoc& doc, const TopicModel& model, const Vocabulary& vocab,
                           double tol, int max_iter) {
  return infer_mixture_full(doc, model, vocab, tol, max_iter).mixture;
}

std::vector<IssueMixture> infer_all_mixtures(const std::vector<BillDoc>& bills,
                                             const TopicModel& model, const Vocabulary& vocab,
                                             double tol, int max_iter, int threads) {
  std::vector<IssueMixture> out(bills.size());
  parallel_for(bills.size(), threads, [&](size_t i) {
    out[i] = infer_mixture(bills[i], model, vocab, tol, max_iter);
  });
  return out;
}

std::vector<IssueMixture> encode_direct_labels(const std::vector<BillDoc>& bills,
                                               const std::vector<std::string>& labels) {
  std::map<std::string, int> topic_of;
  for (size_t k = 0; k < labels.size(); ++k) topic_of[labels[k]] = int(k);
  std::vector<IssueMixture> out;
  out.reserve(bills.size());
  std::string offenders;
  for (const auto& b : bills) {
    IssueMixture m;
    m.bill_id = b.id;
    m.theta.assign(labels.size(), 0.0);
    int j = 0;
    for (const auto& l : b.labels) {
      auto it = topic_of.find(l);
      if (it != topic_of.end()) {
        m.theta[it->second] = 1.0;
        ++j;
      }
    }
    if (j == 0) {
      offenders += offenders.empty() ? b.id : ", " + b.id;
    } else {
      for (double& t : m.theta) t /= j;
    }
    out.push_back(std::move(m));
  }
  if (!offenders.empty())
    throw UnlabeledBillError("bills with no retained label: " + offenders);
  return out;
}

std::vector<IssueMixture> permute_mixtures(const std::vector<IssueMixture>& mixtures,
                                           uint64_t seed) {
  if (mixtures.empty()) throw InvalidArgument("cannot permute an empty mixture list");
  Rng rng(derive_seed(seed, {0x9E43}));
  auto perm = rng.permutation(mixtures.size());
  std::vector<IssueMixture> out(mixtures.size());
  for (size_t i = 0; i < mixtures.size(); ++i) {
    out[i].bill_id = mixtures[i].bill_id;
    out[i].theta = mixtures[perm[i]].theta;
  }
  return out;
}

LdaFit fit_unsupervised_lda(const std::vector<BillDoc>& bills, const Vocabulary& vocab, int K,
                            uint64_t seed, int max_iter, double tol, double alpha,
                            int threads) {
  if (K < 1) throw InvalidArgument("K must be at least 1");
  int V = int(vocab.phrases.size());
  if (V == 0) throw EmptyModelError("empty vocabulary");
  if (alpha <= 0) alpha = 1.0 / K;

  Rng rng(derive_seed(seed, {0x1DA}));
  TopicModel cur;
  cur.alpha = alpha;
  cur.topics.resize(K);
  for (int k = 0; k < K; ++k) {
    cur.topics[k].label = "topic-" + std::to_string(k);
    cur.topics[k].word_dist.resize(V);
    double sum = 0;
    for (int w = 0; w < V; ++w) {
      cur.topics[k].word_dist[w] = rng.gamma(1.0);
      sum += cur.topics[k].word_dist[w];
    }
    for (int w = 0; w < V; ++w) cur.topics[k].word_dist[w] /= sum;
  }

  auto counts = all_doc_counts(bills, vocab, threads);
  const double pseudocount = 0.01;
  LdaFit fit;
  double prev = -HUGE_VAL;
  for (int it = 0; it < max_iter; ++it) {
    double obj = 0;
    cur = em_pass(cur, counts, V, pseudocount, tol, 200, threads, &obj);
    fit.iterations = it + 1;
    if (prev != -HUGE_VAL && std::fabs(obj - prev) <= tol * std::fabs(prev)) {
      fit.converged = true;
      fit.objective = obj;
      break;
    }
    prev = obj;
    fit.objective = obj;
  }
  fit.model = std::move(cur);
  return fit;
}

}  // namespace rollcall
