#include "rollcall/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Dense>

#include "rollcall/csv.hpp"
#include "rollcall/errors.hpp"
#include "rollcall/par.hpp"

namespace rollcall {

namespace {

const std::vector<std::string> kFeatureNames = {
    "log.count",        "log.docs",         "anchor.present", "anchor.freq",
    "count.per.doc",    "docs.sq",          "has.sec",        "has.par",
    "has.strik",        "has.amend",        "has.ins",        "has.clause",
    "has.provision",    "has.title",        "test.pos",       "test.zero",
    "test.neg",         "terms.1",          "terms.2",        "terms.3",
    "terms.4",          "terms.5",          "logdocs.x.anchor", "logcount.x.logdocs"};

bool contains(const std::string& hay, const char* needle) {
  return hay.find(needle) != std::string::npos;
}

int term_count(const std::string& phrase) {
  return int(std::count(phrase.begin(), phrase.end(), ' ')) + 1;
}

}  // namespace

const std::vector<std::string>& feature_names() { return kFeatureNames; }

std::vector<PhraseStats> extract_phrases(const std::vector<BillDoc>& bills, int max_len,
                                         int threads) {
  if (max_len < 1) throw InvalidArgument("max_len must be at least 1");
  using Counts = std::unordered_map<std::string, std::pair<long long, long long>>;
  std::vector<Counts> partial(bills.size());
  parallel_for(bills.size(), threads, [&](size_t i) {
    const auto& toks = bills[i].tokens;
    std::unordered_map<std::string, long long> local;
    for (size_t s = 0; s < toks.size(); ++s) {
      std::string phrase;
      for (int l = 0; l < max_len && s + size_t(l) < toks.size(); ++l) {
        if (l) phrase += ' ';
        phrase += toks[s + size_t(l)];
        ++local[phrase];
      }
    }
    for (auto& [p, c] : local) partial[i][p] = {c, 1};
  });
  Counts total;
  for (const auto& part : partial)
    for (const auto& [p, cd] : part) {
      auto& slot = total[p];
      slot.first += cd.first;
      slot.second += cd.second;
    }
  long long occurrences = 0;
  for (const auto& [p, cd] : total) occurrences += cd.first;
  std::vector<PhraseStats> out;
  out.reserve(total.size());
  for (const auto& [p, cd] : total)
    out.push_back({p, cd.first, cd.second,
                   occurrences ? double(cd.first) / double(occurrences) : 0.0});
  std::sort(out.begin(), out.end(),
            [](const PhraseStats& a, const PhraseStats& b) { return a.phrase < b.phrase; });
  return out;
}

std::vector<PhraseStats> filter_phrases(const std::vector<PhraseStats>& stats, long long n_bills,
                                        double max_doc_frac, long long min_docs,
                                        double min_corpus_frac) {
  if (max_doc_frac <= 0 || min_docs <= 0 || min_corpus_frac <= 0)
    throw InvalidArgument("filter thresholds must be positive");
  std::vector<PhraseStats> out;
  for (const auto& s : stats) {
    if (double(s.doc_count) > max_doc_frac * double(n_bills)) continue;
    if (s.doc_count < min_docs) continue;
    if (s.corpus_fraction < min_corpus_frac) continue;
    out.push_back(s);
  }
  return out;
}

PhraseFeatures compute_features(const PhraseStats& stats, const AnchorTable& anchors) {
  auto it = anchors.find(stats.phrase);
  double anchor_freq = it != anchors.end() ? it->second.frequency : 0.0;
  double expected = it != anchors.end() ? it->second.expected_count : 0.0;
  bool present = anchor_freq > 0;
  if (!std::isfinite(anchor_freq) || !std::isfinite(expected))
    throw InvalidArgument("non-finite anchor statistics for phrase '" + stats.phrase + "'");

  double test = 0.0;
  if (expected > 0) test = (double(stats.corpus_count) - expected) / std::sqrt(expected);

  double log_count = std::log(double(stats.corpus_count) + 1.0);
  double log_docs = std::log(double(stats.doc_count) + 1.0);
  int terms = term_count(stats.phrase);

  PhraseFeatures f;
  f.phrase = stats.phrase;
  f.values = {
      log_count,
      log_docs,
      present ? 1.0 : 0.0,
      anchor_freq,
      stats.doc_count ? double(stats.corpus_count) / double(stats.doc_count) : 0.0,
      double(stats.doc_count) * double(stats.doc_count),
      contains(stats.phrase, "sec") ? 1.0 : 0.0,
      contains(stats.phrase, "paragra") ? 1.0 : 0.0,
      contains(stats.phrase, "strik") ? 1.0 : 0.0,
      contains(stats.phrase, "amend") ? 1.0 : 0.0,
      contains(stats.phrase, "insert") ? 1.0 : 0.0,
      contains(stats.phrase, "clause") ? 1.0 : 0.0,
      contains(stats.phrase, "provision") ? 1.0 : 0.0,
      contains(stats.phrase, "title") ? 1.0 : 0.0,
      std::log(std::max(test, 0.0) + 1.0),
      test == 0.0 ? 1.0 : 0.0,
      std::log(std::max(-test, 0.0) + 1.0),
      terms == 1 ? 1.0 : 0.0,
      terms == 2 ? 1.0 : 0.0,
      terms == 3 ? 1.0 : 0.0,
      terms == 4 ? 1.0 : 0.0,
      terms == 5 ? 1.0 : 0.0,
      log_docs * (present ? 1.0 : 0.0),
      log_count * log_docs,
  };
  for (double v : f.values)
    if (!std::isfinite(v))
      throw InvalidArgument("non-finite feature for phrase '" + stats.phrase + "'");
  return f;
}

VocabModel train_phrase_classifier(const std::vector<PhraseFeatures>& features,
                                   const std::set<std::string>& bad_phrases, double l2_penalty,
                                   int max_iter, double tol) {
  if (bad_phrases.empty()) throw InvalidArgument("bad-phrase list is empty");
  if (l2_penalty <= 0) throw InvalidArgument("l2 penalty must be positive");
  size_t n = features.size();
  size_t p = kFeatureNames.size();
  Eigen::MatrixXd X(n, p + 1);
  Eigen::VectorXd y(n);
  size_t n_bad = 0;
  for (size_t i = 0; i < n; ++i) {
    if (features[i].values.size() != p) throw DimensionError("feature vector length mismatch");
    for (size_t j = 0; j < p; ++j) X(i, j) = features[i].values[j];
    X(i, p) = 1.0;  // intercept, unpenalized
    bool bad = bad_phrases.count(features[i].phrase) > 0;
    y(i) = bad ? 0.0 : 1.0;
    n_bad += bad;
  }
  if (n_bad == 0 || n_bad == n)
    throw InvalidArgument("classifier needs at least one positive and one negative example");

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p + 1);
  auto grad_of = [&](const Eigen::VectorXd& wv) {
    Eigen::VectorXd eta = X * wv;
    Eigen::VectorXd mu = eta.unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); });
    Eigen::VectorXd g = X.transpose() * (y - mu);
    g.head(p) -= l2_penalty * wv.head(p);
    return g;
  };
  auto obj_of = [&](const Eigen::VectorXd& wv) {
    Eigen::VectorXd eta = X * wv;
    double ll = 0;
    for (size_t i = 0; i < n; ++i) {
      double t = eta(i);
      double lse = t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
      ll += y(i) * t - lse;
    }
    return ll - 0.5 * l2_penalty * wv.head(p).squaredNorm();
  };

  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd eta = X * w;
    Eigen::VectorXd mu = eta.unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); });
    Eigen::VectorXd g = X.transpose() * (y - mu);
    g.head(p) -= l2_penalty * w.head(p);
    if (g.norm() <= tol) {
      converged = true;
      break;
    }
    Eigen::VectorXd s = mu.array() * (1.0 - mu.array());
    Eigen::MatrixXd H = X.transpose() * s.asDiagonal() * X;
    for (size_t j = 0; j < p; ++j) H(j, j) += l2_penalty;
    H.diagonal().array() += 1e-10;
    Eigen::VectorXd step = H.ldlt().solve(g);
    double f0 = obj_of(w);
    double damp = 1.0;
    Eigen::VectorXd w_new = w + step;
    while (obj_of(w_new) < f0 && damp > 1e-8) {
      damp *= 0.5;
      w_new = w + damp * step;
    }
    w = w_new;
  }
  if (!converged && grad_of(w).norm() > tol)
    throw ConvergenceError("phrase classifier did not reach gradient tolerance");

  VocabModel m;
  m.l2_penalty = l2_penalty;
  m.intercept = w(p);
  for (size_t j = 0; j < p; ++j) m.weights[kFeatureNames[j]] = w(j);
  return m;
}

double phrase_score(const VocabModel& model, const PhraseFeatures& f) {
  if (f.values.size() != kFeatureNames.size())
    throw DimensionError("feature vector length mismatch");
  double s = model.intercept;
  for (size_t j = 0; j < kFeatureNames.size(); ++j) {
    auto it = model.weights.find(kFeatureNames[j]);
    if (it == model.weights.end())
      throw DimensionError("model missing weight for feature '" + kFeatureNames[j] + "'");
    s += it->second * f.values[j];
  }
  return s;
}

Vocabulary select_vocabulary(const VocabModel& model, const std::vector<PhraseFeatures>& features,
                             int size) {
  if (size < 0 || size_t(size) > features.size())
    throw InvalidArgument("vocabulary size exceeds candidate count");
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(features.size());
  for (const auto& f : features) scored.push_back({phrase_score(model, f), &f.phrase});
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  std::vector<std::string> phrases;
  phrases.reserve(size);
  for (int i = 0; i < size; ++i) phrases.push_back(*scored[i].second);
  return vocabulary_from_phrases(std::move(phrases));
}

Vocabulary vocabulary_from_phrases(std::vector<std::string> phrases) {
  Vocabulary v;
  v.phrases = std::move(phrases);
  for (size_t i = 0; i < v.phrases.size(); ++i) {
    if (!v.index.emplace(v.phrases[i], int(i)).second)
      throw IntegrityError("duplicate vocabulary phrase '" + v.phrases[i] + "'");
  }
  return v;
}

std::vector<std::pair<int, int>> bag_of_phrases(const BillDoc& doc, const Vocabulary& vocab) {
  int max_len = 1;
  for (const auto& p : vocab.phrases) max_len = std::max(max_len, term_count(p));
  std::map<int, int> counts;
  const auto& toks = doc.tokens;
  for (size_t s = 0; s < toks.size(); ++s) {
    std::string phrase;
    for (int l = 0; l < max_len && s + size_t(l) < toks.size(); ++l) {
      if (l) phrase += ' ';
      phrase += toks[s + size_t(l)];
      auto it = vocab.index.find(phrase);
      if (it != vocab.index.end()) ++counts[it->second];
    }
  }
  return {counts.begin(), counts.end()};
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (const auto& p : vocab.phrases) out << p << '\n';
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::vector<std::string> phrases;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) phrases.push_back(line);
  }
  return vocabulary_from_phrases(std::move(phrases));
}

AnchorTable load_anchor_table(const std::string& path) {
  CsvReader r(path);
  r.expect_header({"phrase", "anchortext_freq", "expected_count"});
  AnchorTable t;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 3)
      throw ParseError(path + ":" + std::to_string(r.lineno) + ": expected 3 fields");
    AnchorEntry e;
    try {
      e.frequency = std::stod(f[1]);
      e.expected_count = std::stod(f[2]);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(r.lineno) + ": bad number");
    }
    t[f[0]] = e;
  }
  return t;
}

std::set<std::string> load_phrase_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

}  // namespace rollcall
