#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "rollcall/vocab.hpp"
#include "util.hpp"

using namespace rollcall;
using testutil::TempDir;
using testutil::write_file;

namespace {

std::map<std::string, PhraseStats> by_phrase(const std::vector<PhraseStats>& stats) {
  std::map<std::string, PhraseStats> m;
  for (const auto& s : stats) m[s.phrase] = s;
  return m;
}

PhraseStats stats_of(const std::string& phrase, long long corpus_count, long long doc_count,
                     double corpus_fraction = 0.01) {
  return {phrase, corpus_count, doc_count, corpus_fraction};
}

double feature(const PhraseFeatures& f, const std::string& name) {
  const auto& names = feature_names();
  auto it = std::find(names.begin(), names.end(), name);
  REQUIRE(it != names.end());
  return f.values[size_t(it - names.begin())];
}

}  // namespace

TEST_CASE("phrase extraction enumerates all n-grams up to the cap") {
  std::vector<BillDoc> bills = {{"B1", "", {"a", "b"}, {}}};
  auto m = by_phrase(extract_phrases(bills, 2));
  REQUIRE(m.size() == 3);
  CHECK(m.at("a").corpus_count == 1);
  CHECK(m.at("b").corpus_count == 1);
  CHECK(m.at("a b").corpus_count == 1);
  CHECK(m.at("a b").doc_count == 1);
}

TEST_CASE("doc_count counts distinct documents") {
  std::vector<BillDoc> bills = {{"B1", "", {"tax", "tax"}, {}}, {"B2", "", {"tax"}, {}}};
  auto m = by_phrase(extract_phrases(bills, 1));
  CHECK(m.at("tax").doc_count == 2);
  CHECK(m.at("tax").corpus_count == 3);
}

TEST_CASE("corpus_fraction is the share of all phrase occurrences") {
  // 10 copies of "x" and 990 distinct fillers: 1000 unigram occurrences total
  std::vector<std::string> toks(10, "x");
  for (int i = 0; i < 990; ++i) toks.push_back("w" + std::to_string(i));
  std::vector<BillDoc> bills = {{"B1", "", toks, {}}};
  auto m = by_phrase(extract_phrases(bills, 1));
  CHECK(m.at("x").corpus_fraction == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("extraction is independent of thread count") {
  std::vector<BillDoc> bills;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::string> toks;
    for (int j = 0; j < 30; ++j) toks.push_back("t" + std::to_string((i * 7 + j * 3) % 11));
    bills.push_back({"B" + std::to_string(i), "", toks, {}});
  }
  auto serial = extract_phrases(bills, 3, 1);
  auto parallel = extract_phrases(bills, 3, 4);
  REQUIRE(serial.size() == parallel.size());
  for (size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].phrase == parallel[i].phrase);
    CHECK(serial[i].corpus_count == parallel[i].corpus_count);
    CHECK(serial[i].doc_count == parallel[i].doc_count);
  }
}

TEST_CASE("frequency filter thresholds") {
  long long n_bills = 100;
  std::vector<PhraseStats> stats = {
      stats_of("too common", 20, 11),     // 11% of bills
      stats_of("too rare docs", 10, 3),   // under 4 docs
      {"too rare corpus", 10, 5, 2e-6},   // under 1e-5 of occurrences
      {"keeper", 10, 5, 2e-5},            // 5% of bills, 5 docs, above corpus floor
  };
  auto kept = filter_phrases(stats, n_bills);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].phrase == "keeper");

  SUBCASE("boundaries: exactly 10% of bills and exactly 4 docs pass") {
    auto edge = filter_phrases({stats_of("edge", 12, 10), stats_of("four", 8, 4)}, n_bills);
    CHECK(edge.size() == 2);
  }
  SUBCASE("thresholds must be positive") {
    CHECK_THROWS_AS(filter_phrases(stats, n_bills, 0.0), InvalidArgument);
  }
}

TEST_CASE("feature vector matches the documented semantics") {
  AnchorTable anchors;
  anchors["budget cap"] = {0.004, 16.0};

  SUBCASE("observed equals expected makes the deviation features zero") {
    auto f = compute_features(stats_of("budget cap", 16, 6), anchors);
    CHECK(feature(f, "test.pos") == 0.0);
    CHECK(feature(f, "test.neg") == 0.0);
    CHECK(feature(f, "test.zero") == 1.0);
    CHECK(feature(f, "anchor.present") == 1.0);
    CHECK(feature(f, "anchor.freq") == doctest::Approx(0.004));
  }
  SUBCASE("absent anchor defaults to zero presence and frequency") {
    auto f = compute_features(stats_of("novel phrase", 9, 5), anchors);
    CHECK(feature(f, "anchor.present") == 0.0);
    CHECK(feature(f, "anchor.freq") == 0.0);
    CHECK(feature(f, "logdocs.x.anchor") == 0.0);
  }
  SUBCASE("term-length indicators are one-hot") {
    auto f = compute_features(stats_of("budget cap", 16, 6), anchors);
    CHECK(feature(f, "terms.2") == 1.0);
    for (const char* other : {"terms.1", "terms.3", "terms.4", "terms.5"})
      CHECK(feature(f, other) == 0.0);
  }
  SUBCASE("deviation transforms split by sign") {
    auto above = compute_features(stats_of("budget cap", 32, 6), anchors);
    CHECK(feature(above, "test.pos") == doctest::Approx(std::log((32.0 - 16.0) / 4.0 + 1.0)));
    CHECK(feature(above, "test.neg") == 0.0);
    CHECK(feature(above, "test.zero") == 0.0);
    auto below = compute_features(stats_of("budget cap", 8, 4), anchors);
    CHECK(feature(below, "test.pos") == 0.0);
    CHECK(feature(below, "test.neg") == doctest::Approx(std::log(2.0 + 1.0)));
  }
  SUBCASE("substring indicators") {
    auto f = compute_features(stats_of("strike section title", 8, 5), anchors);
    CHECK(feature(f, "has.strik") == 1.0);
    CHECK(feature(f, "has.sec") == 1.0);
    CHECK(feature(f, "has.title") == 1.0);
    CHECK(feature(f, "has.amend") == 0.0);
  }
}

namespace {

// synthetic labeled pool: bad phrases carry "strik" and higher doc counts
std::vector<PhraseFeatures> classifier_pool(std::set<std::string>* bad_out) {
  AnchorTable anchors;
  std::vector<PhraseFeatures> feats;
  for (int i = 0; i < 40; ++i) {
    bool bad = i % 2 == 0;
    std::string phrase = (bad ? "strik clause " : "health care ") + std::to_string(i);
    long long docs = bad ? 40 + i : 5 + i % 7;
    feats.push_back(compute_features(stats_of(phrase, docs * 3, docs), anchors));
    if (bad) bad_out->insert(phrase);
  }
  return feats;
}

}  // namespace

TEST_CASE("phrase classifier learns the separating features") {
  std::set<std::string> bad;
  auto feats = classifier_pool(&bad);
  auto model = train_phrase_classifier(feats, bad, 1.0);
  CHECK(std::isfinite(model.intercept));
  CHECK(model.weights.at("has.strik") < 0);
  int correct = 0;
  for (const auto& f : feats) {
    bool predicted_good = phrase_score(model, f) > 0;
    correct += predicted_good != (bad.count(f.phrase) > 0);
  }
  CHECK(double(correct) / double(feats.size()) > 0.9);
}

TEST_CASE("perfect separation stays finite under the penalty") {
  std::set<std::string> bad;
  auto feats = classifier_pool(&bad);
  auto model = train_phrase_classifier(feats, bad, 0.5);
  for (const auto& [name, w] : model.weights) {
    CAPTURE(name);
    CHECK(std::isfinite(w));
    CHECK(std::fabs(w) < 1e3);
  }
}

TEST_CASE("uninformative labels shrink to zero as the penalty grows") {
  AnchorTable anchors;
  std::vector<PhraseFeatures> feats;
  std::set<std::string> bad;
  // identical statistics for every phrase, labels alternate: nothing to learn
  for (int i = 0; i < 30; ++i) {
    std::string phrase = "word" + std::to_string(i);
    feats.push_back(compute_features(stats_of(phrase, 12, 6), anchors));
    if (i % 2 == 0) bad.insert(phrase);
  }
  auto model = train_phrase_classifier(feats, bad, 1e6);
  for (const auto& [name, w] : model.weights) {
    CAPTURE(name);
    CHECK(std::fabs(w) < 1e-4);
  }
}

TEST_CASE("classifier argument validation") {
  std::set<std::string> bad;
  auto feats = classifier_pool(&bad);
  CHECK_THROWS_AS(train_phrase_classifier(feats, {}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(train_phrase_classifier(feats, bad, 0.0), InvalidArgument);
  std::set<std::string> all_bad;
  for (const auto& f : feats) all_bad.insert(f.phrase);
  CHECK_THROWS_AS(train_phrase_classifier(feats, all_bad, 1.0), InvalidArgument);
}

TEST_CASE("vocabulary selection ranks by score with lexicographic ties") {
  VocabModel model;
  for (const auto& n : feature_names()) model.weights[n] = 0.0;
  model.weights["log.count"] = 1.0;
  AnchorTable anchors;
  std::vector<PhraseFeatures> feats = {
      compute_features(stats_of("zeta", 20, 5), anchors),
      compute_features(stats_of("alpha", 20, 5), anchors),  // ties with zeta
      compute_features(stats_of("mid", 10, 5), anchors),
      compute_features(stats_of("top", 50, 5), anchors),
  };

  SUBCASE("full size keeps everything in rank order") {
    auto v = select_vocabulary(model, feats, 4);
    CHECK(v.phrases == std::vector<std::string>{"top", "alpha", "zeta", "mid"});
    CHECK(v.index.at("top") == 0);
  }
  SUBCASE("truncation keeps the prefix") {
    auto v = select_vocabulary(model, feats, 2);
    CHECK(v.phrases == std::vector<std::string>{"top", "alpha"});
  }
  SUBCASE("size above the candidate count is rejected") {
    CHECK_THROWS_AS(select_vocabulary(model, feats, 5), InvalidArgument);
  }
}

TEST_CASE("bag_of_phrases counts contiguous occurrences") {
  auto vocab = vocabulary_from_phrases({"a b", "c"});

  SUBCASE("overlapping bigrams count each start position") {
    BillDoc doc{"B1", "", {"a", "b", "a", "b"}, {}};
    auto bag = bag_of_phrases(doc, vocab);
    REQUIRE(bag.size() == 1);
    CHECK(bag[0] == std::pair<int, int>{0, 2});
  }
  SUBCASE("no vocabulary phrase present") {
    BillDoc doc{"B1", "", {"x", "y"}, {}};
    CHECK(bag_of_phrases(doc, vocab).empty());
  }
  SUBCASE("empty token list") {
    BillDoc doc{"B1", "", {}, {}};
    CHECK(bag_of_phrases(doc, vocab).empty());
  }
}

TEST_CASE("vocabulary and support files round-trip") {
  TempDir td;
  auto vocab = vocabulary_from_phrases({"budget cap", "tax relief", "war powers"});
  save_vocabulary(vocab, td.file("vocab.txt"));
  auto back = load_vocabulary(td.file("vocab.txt"));
  CHECK(back.phrases == vocab.phrases);
  CHECK(back.index.at("war powers") == 2);

  CHECK_THROWS_AS(vocabulary_from_phrases({"dup", "dup"}), IntegrityError);

  write_file(td.file("anchors.csv"),
             "phrase,anchortext_freq,expected_count\nbudget cap,0.004,16\n");
  auto anchors = load_anchor_table(td.file("anchors.csv"));
  CHECK(anchors.at("budget cap").frequency == doctest::Approx(0.004));
  CHECK(anchors.at("budget cap").expected_count == doctest::Approx(16.0));

  write_file(td.file("bad.txt"), "strik clause\n\npursuant to\n");
  auto bad = load_phrase_list(td.file("bad.txt"));
  CHECK(bad == std::set<std::string>{"pursuant to", "strik clause"});
}
