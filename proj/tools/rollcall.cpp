#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rollcall/corpus.hpp"
#include "rollcall/csv.hpp"
#include "rollcall/errors.hpp"
#include "rollcall/eval.hpp"
#include "rollcall/hash.hpp"
#include "rollcall/inference.hpp"
#include "rollcall/io.hpp"
#include "rollcall/model.hpp"
#include "rollcall/rng.hpp"
#include "rollcall/topics.hpp"
#include "rollcall/vocab.hpp"

namespace fs = std::filesystem;
using namespace rollcall;

namespace {

struct Common {
  std::string out;
  uint64_t seed = 1;
  int threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "output directory")->required();
  cmd->add_option("--seed", c.seed, "base random seed");
  cmd->add_option("--threads", c.threads, "worker threads (never changes outputs)");
  cmd->set_config("--config", "", "flat key=value config file");
}

struct ModelFlags {
  Hyperparams hp;
  UpdateSchedule sched;
  FixedVariances var;
};

void add_model_flags(CLI::App* cmd, ModelFlags& mf) {
  cmd->add_option("--lambda", mf.hp.lambda1, "Laplace rate on issue adjustments");
  cmd->add_option("--prior-var-x", mf.hp.prior_var_x, "prior variance of ideal points");
  cmd->add_option("--prior-var-a", mf.hp.prior_var_a, "prior variance of polarities");
  cmd->add_option("--prior-var-b", mf.hp.prior_var_b, "prior variance of popularities");
  cmd->add_option("--var-x", mf.var.var_x, "fixed variational variance for x");
  cmd->add_option("--var-z", mf.var.var_z, "fixed variational variance for z");
  cmd->add_option("--var-a", mf.var.var_a, "fixed variational variance for a");
  cmd->add_option("--var-b", mf.var.var_b, "fixed variational variance for b");
  cmd->add_option("--m-init", mf.sched.m_init, "initial Monte Carlo batch size");
  cmd->add_option("--m-growth", mf.sched.m_growth, "batch growth factor");
  cmd->add_option("--m-max", mf.sched.m_max, "maximum batch size");
  cmd->add_option("--ema-decay", mf.sched.ema_decay, "decay of the ELBO-change average");
  cmd->add_option("--ema-threshold", mf.sched.ema_threshold, "convergence threshold");
  cmd->add_option("--step-cap", mf.sched.step_cap, "per-coordinate step clamp");
  cmd->add_option("--max-sweeps", mf.sched.max_sweeps, "sweep budget");
}

void record_model_flags(Manifest& m, const ModelFlags& mf) {
  m.config["lambda"] = fmt_double(mf.hp.lambda1);
  m.config["prior_var_x"] = fmt_double(mf.hp.prior_var_x);
  m.config["prior_var_a"] = fmt_double(mf.hp.prior_var_a);
  m.config["prior_var_b"] = fmt_double(mf.hp.prior_var_b);
  m.config["var_x"] = fmt_double(mf.var.var_x);
  m.config["var_z"] = fmt_double(mf.var.var_z);
  m.config["var_a"] = fmt_double(mf.var.var_a);
  m.config["var_b"] = fmt_double(mf.var.var_b);
  m.config["m_init"] = std::to_string(mf.sched.m_init);
  m.config["m_growth"] = fmt_double(mf.sched.m_growth);
  m.config["m_max"] = std::to_string(mf.sched.m_max);
  m.config["ema_decay"] = fmt_double(mf.sched.ema_decay);
  m.config["ema_threshold"] = fmt_double(mf.sched.ema_threshold);
  m.config["step_cap"] = fmt_double(mf.sched.step_cap);
  m.config["max_sweeps"] = std::to_string(mf.sched.max_sweeps);
}

void record_common(Manifest& m, const Common& c) {
  m.config["seed"] = std::to_string(c.seed);
  m.config["out"] = c.out;
}

std::string out_path(const Common& c, const std::string& name) {
  return (fs::path(c.out) / name).string();
}

void finish_manifest(Manifest& m, const Common& c, const std::vector<std::string>& outputs) {
  for (const auto& name : outputs) m.outputs[name] = hash_file(out_path(c, name));
  write_manifest(out_path(c, "manifest.json"), m);
}

std::vector<std::string> read_label_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

void write_label_file(const std::string& path, const std::vector<std::string>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  for (const auto& l : labels) out << l << '\n';
}

std::vector<std::string> frequent_labels(const std::vector<BillDoc>& bills, int min_count) {
  std::map<std::string, int> counts;
  for (const auto& b : bills)
    for (const auto& l : b.labels) ++counts[l];
  std::vector<std::string> kept;
  for (const auto& [label, n] : counts)
    if (n >= min_count) kept.push_back(label);
  if (kept.empty()) throw EmptyModelError("no issue label reaches the minimum bill count");
  return kept;
}

std::vector<std::string> default_labels(int K) {
  std::vector<std::string> out(K);
  for (int k = 0; k < K; ++k) out[k] = "issue-" + std::to_string(k);
  return out;
}

// ---------------------------------------------------------------- prepare

struct PrepareArgs {
  Common common;
  std::string bills_path, anchors_path, good_path, bad_path;
  std::string variant = "issue_lda";
  int vocab_size = 5000;
  int max_ngram = 5;
  double l2 = 1.0;
  int min_label_count = 25;
  double pseudocount = 0.01;
  int smooth_iterations = 2;
  int k = 10;
  int lda_max_iter = 100;
  double lda_tol = 1e-5;
};

int cmd_prepare(const PrepareArgs& a) {
  fs::create_directories(a.common.out);
  auto bills = load_bills(a.bills_path);
  auto stats = extract_phrases(bills, a.max_ngram, a.common.threads);
  auto filtered = filter_phrases(stats, (long long)bills.size());

  Vocabulary vocab;
  bool classified = !a.good_path.empty() || !a.bad_path.empty();
  if (classified) {
    if (a.good_path.empty() || a.bad_path.empty())
      throw InvalidArgument("--good-phrases and --bad-phrases go together");
    AnchorTable anchors = a.anchors_path.empty() ? AnchorTable{} : load_anchor_table(a.anchors_path);
    auto good = load_phrase_list(a.good_path);
    auto bad = load_phrase_list(a.bad_path);
    std::vector<PhraseFeatures> train;
    for (const auto& s : stats) {
      bool g = good.count(s.phrase), b = bad.count(s.phrase);
      if (!g && !b) continue;
      if (g && b) throw InvalidArgument("phrase labeled both good and bad: " + s.phrase);
      train.push_back(compute_features(s, anchors));
    }
    if (train.empty()) throw InvalidArgument("no labeled phrase occurs in the corpus");
    auto model = train_phrase_classifier(train, bad, a.l2);
    std::vector<PhraseFeatures> cand;
    cand.reserve(filtered.size());
    for (const auto& s : filtered) cand.push_back(compute_features(s, anchors));
    int size = std::min<int>(a.vocab_size, (int)cand.size());
    vocab = select_vocabulary(model, cand, size);
  } else {
    // no labeled phrases: rank the filtered candidates by corpus frequency
    auto ranked = filtered;
    std::sort(ranked.begin(), ranked.end(), [](const PhraseStats& l, const PhraseStats& r) {
      if (l.corpus_count != r.corpus_count) return l.corpus_count > r.corpus_count;
      return l.phrase < r.phrase;
    });
    if ((int)ranked.size() > a.vocab_size) ranked.resize(a.vocab_size);
    std::vector<std::string> phrases;
    phrases.reserve(ranked.size());
    for (const auto& s : ranked) phrases.push_back(s.phrase);
    vocab = vocabulary_from_phrases(std::move(phrases));
  }
  save_vocabulary(vocab, out_path(a.common, "vocabulary.txt"));

  Manifest m;
  m.command = "prepare";
  record_common(m, a.common);
  m.config["bills"] = a.bills_path;
  m.config["variant"] = a.variant;
  m.config["vocab_size"] = std::to_string(a.vocab_size);
  m.config["max_ngram"] = std::to_string(a.max_ngram);
  m.config["min_label_count"] = std::to_string(a.min_label_count);
  m.config["pseudocount"] = fmt_double(a.pseudocount);
  m.config["smooth_iterations"] = std::to_string(a.smooth_iterations);
  m.config["l2"] = fmt_double(a.l2);
  m.inputs[a.bills_path] = hash_file(a.bills_path);
  if (!a.anchors_path.empty()) m.inputs[a.anchors_path] = hash_file(a.anchors_path);
  if (!a.good_path.empty()) m.inputs[a.good_path] = hash_file(a.good_path);
  if (!a.bad_path.empty()) m.inputs[a.bad_path] = hash_file(a.bad_path);
  m.work["bills"] = bills.size();
  m.work["candidate_phrases"] = stats.size();
  m.work["filtered_phrases"] = filtered.size();
  m.work["vocabulary"] = vocab.phrases.size();

  std::vector<std::string> outputs{"vocabulary.txt"};
  int K = 0;
  if (a.variant == "issue_lda") {
    auto model = build_labeled_topics(bills, vocab, a.min_label_count, a.pseudocount);
    model = smooth_topics(model, bills, vocab, a.smooth_iterations, a.pseudocount);
    auto mixtures = infer_all_mixtures(bills, model, vocab, 1e-5, 200, a.common.threads);
    K = model.K();
    save_topic_model(out_path(a.common, "topics.json"), model);
    save_mixtures(out_path(a.common, "mixtures.csv"), mixtures);
    write_label_file(out_path(a.common, "labels.txt"), model.labels());
    outputs.insert(outputs.end(), {"topics.json", "mixtures.csv", "labels.txt"});
  } else if (a.variant == "issue_direct") {
    auto labels = frequent_labels(bills, a.min_label_count);
    auto mixtures = encode_direct_labels(bills, labels);
    K = (int)labels.size();
    save_mixtures(out_path(a.common, "mixtures.csv"), mixtures);
    write_label_file(out_path(a.common, "labels.txt"), labels);
    outputs.insert(outputs.end(), {"mixtures.csv", "labels.txt"});
  } else if (a.variant == "standard_lda") {
    auto lda = fit_unsupervised_lda(bills, vocab, a.k, derive_seed(a.common.seed, {3}),
                                    a.lda_max_iter, a.lda_tol, -1.0, a.common.threads);
    auto mixtures = infer_all_mixtures(bills, lda.model, vocab, 1e-5, 200, a.common.threads);
    K = lda.model.K();
    save_topic_model(out_path(a.common, "topics.json"), lda.model);
    save_mixtures(out_path(a.common, "mixtures.csv"), mixtures);
    write_label_file(out_path(a.common, "labels.txt"), lda.model.labels());
    outputs.insert(outputs.end(), {"topics.json", "mixtures.csv", "labels.txt"});
  }
  m.work["topics"] = (uint64_t)K;
  finish_manifest(m, a.common, outputs);

  std::cout << "vocabulary=" << vocab.phrases.size() << "\n";
  if (a.variant != "classic") std::cout << "K=" << K << "\n";
  return 0;
}

// -------------------------------------------------------------------- fit

struct FitArgs {
  Common common;
  ModelFlags mf;
  std::string lawmakers_path, bills_path, votes_path, mixtures_path, labels_path;
  std::string variant = "auto";
  int permutation_rep = 0;
  bool resume = false;
};

int cmd_fit(const FitArgs& a) {
  fs::create_directories(a.common.out);
  auto data = load_dataset(a.lawmakers_path, a.bills_path, a.votes_path);

  std::string variant = a.variant;
  if (variant == "auto") variant = a.mixtures_path.empty() ? "classic" : "issue_lda";
  std::vector<IssueMixture> mixtures;
  if (variant != "classic") {
    if (a.mixtures_path.empty())
      throw InvalidArgument("variant " + variant + " requires --mixtures");
    mixtures = load_mixtures(a.mixtures_path);
    if (variant == "issue_permuted")
      mixtures = permute_mixtures(
          mixtures, derive_seed(a.common.seed, {20, (uint64_t)a.permutation_rep}));
  }
  int K = mixtures.empty() ? 0 : (int)mixtures.front().theta.size();

  std::vector<std::string> labels;
  if (!a.labels_path.empty()) {
    labels = read_label_file(a.labels_path);
    if ((int)labels.size() != K)
      throw InvalidArgument("label count does not match mixture dimension");
  } else if (K > 0) {
    labels = default_labels(K);
  }

  std::string ck_path = out_path(a.common, "checkpoint.json");
  FitCheckpoint resume_ck;
  const FitCheckpoint* resume_ptr = nullptr;
  if (a.resume && fs::exists(ck_path)) {
    resume_ck = load_checkpoint(ck_path);
    resume_ptr = &resume_ck;
  }
  auto on_sweep = [&](const FitCheckpoint& ck) { save_checkpoint(ck_path, ck); };

  auto result = fit(data, mixtures, a.mf.hp, a.mf.sched, a.common.seed, a.common.threads,
                    a.mf.var, resume_ptr, on_sweep);

  FittedParams fp;
  fp.params = result.state.means();
  for (const auto& l : data.lawmakers) fp.lawmaker_ids.push_back(l.id);
  for (const auto& b : data.bills) fp.bill_ids.push_back(b.id);
  fp.labels = labels;
  fp.hp = a.mf.hp;
  save_params(out_path(a.common, "params.json"), fp);
  save_trace(out_path(a.common, "trace.csv"), result.elbo_trace);

  Manifest m;
  m.command = "fit";
  record_common(m, a.common);
  record_model_flags(m, a.mf);
  m.config["variant"] = variant;
  m.inputs[a.lawmakers_path] = hash_file(a.lawmakers_path);
  m.inputs[a.bills_path] = hash_file(a.bills_path);
  m.inputs[a.votes_path] = hash_file(a.votes_path);
  if (!a.mixtures_path.empty()) m.inputs[a.mixtures_path] = hash_file(a.mixtures_path);
  if (!a.labels_path.empty()) m.inputs[a.labels_path] = hash_file(a.labels_path);
  m.work["sweeps"] = (uint64_t)result.sweeps;
  m.work["final_m"] = (uint64_t)result.final_m;
  m.work["skipped_updates"] = (uint64_t)result.skipped_updates;
  m.work["converged"] = result.converged ? 1 : 0;
  m.work["identified"] = result.identified ? 1 : 0;
  finish_manifest(m, a.common, {"params.json", "trace.csv", "checkpoint.json"});

  std::cout << "K=" << K << " sweeps=" << result.sweeps << " converged=" << result.converged
            << " identified=" << result.identified;
  if (!result.elbo_trace.empty()) std::cout << " elbo=" << fmt_double(result.elbo_trace.back());
  std::cout << "\n";
  return 0;
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
  Common common;
  ModelFlags mf;
  std::string lawmakers_path, bills_path, votes_path;
  std::string mixtures_path, direct_path, lda_path, labels_path;
  std::string variants = "classic,issue_lda,issue_permuted";
  int folds = 6;
  int permutations = 5;
  int significance_r = 20;
};

int cmd_evaluate(const EvaluateArgs& a) {
  fs::create_directories(a.common.out);
  auto data = load_dataset(a.lawmakers_path, a.bills_path, a.votes_path);

  std::vector<Variant> wanted;
  {
    std::stringstream ss(a.variants);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) wanted.push_back(parse_variant(tok));
  }
  if (wanted.empty()) throw InvalidArgument("--variants is empty");

  std::map<Variant, std::vector<IssueMixture>> mv;
  std::vector<IssueMixture> issue_mixtures;
  bool have_issue = false;
  auto need = [&](const std::string& path, const char* flag, Variant v) {
    if (path.empty())
      throw InvalidArgument("variant " + variant_name(v) + " requires " + flag);
    return load_mixtures(path);
  };
  for (Variant v : wanted) {
    switch (v) {
      case Variant::Classic:
        mv[v] = {};
        break;
      case Variant::IssueLda:
      case Variant::IssuePermuted:
        if (!have_issue) {
          issue_mixtures = need(a.mixtures_path, "--mixtures", v);
          have_issue = true;
        }
        mv[v] = issue_mixtures;
        break;
      case Variant::IssueDirect:
        mv[v] = need(a.direct_path, "--direct-mixtures", v);
        break;
      case Variant::StandardLda:
        mv[v] = need(a.lda_path, "--lda-mixtures", v);
        break;
    }
  }

  std::vector<std::string> labels;
  if (!a.labels_path.empty()) labels = read_label_file(a.labels_path);

  CvOptions opts;
  opts.n_folds = a.folds;
  opts.permutations = a.permutations;
  opts.seed = a.common.seed;
  opts.threads = a.common.threads;
  opts.variances = a.mf.var;
  auto report = cross_validate(data, mv, a.mf.hp, a.mf.sched, opts, labels);

  {
    std::ofstream out(out_path(a.common, "cv.csv"), std::ios::binary);
    out << "variant,permutation,fold,mean_ll,accuracy,n_eval,n_excluded,converged\n";
    for (const auto& r : report.rows)
      out << variant_name(r.variant) << ',' << r.permutation << ',' << r.fold << ','
          << fmt_double(r.mean_ll) << ',' << fmt_double(r.accuracy) << ',' << r.n_eval << ','
          << r.n_excluded << ',' << (r.converged ? 1 : 0) << '\n';
  }
  {
    std::ofstream out(out_path(a.common, "improvements.csv"), std::ios::binary);
    out << "issue,imp,weight_sum,defined\n";
    for (const auto& imp : report.improvements)
      out << csv_escape(imp.label) << ',' << fmt_double(imp.imp) << ','
          << fmt_double(imp.weight_sum) << ',' << (imp.defined ? 1 : 0) << '\n';
  }
  {
    nlohmann::ordered_json j;
    j["format"] = 1;
    nlohmann::ordered_json ll;
    for (Variant v : wanted) ll[variant_name(v)] = report.mean_ll(v);
    j["mean_ll"] = ll;
    j["votes_improved"] = report.votes_improved;
    j["votes_worsened"] = report.votes_worsened;
    std::ofstream out(out_path(a.common, "report.json"), std::ios::binary);
    out << j.dump(2) << "\n";
  }

  std::vector<std::string> outputs{"cv.csv", "improvements.csv", "report.json"};
  uint64_t sig_fits = 0;
  if (a.significance_r > 0 && have_issue) {
    auto sig = permutation_significance(data, issue_mixtures, a.mf.hp, a.mf.sched,
                                        a.significance_r, derive_seed(a.common.seed, {7}),
                                        a.common.threads, a.mf.var);
    sig_fits = (uint64_t)a.significance_r + 1;
    nlohmann::ordered_json j;
    j["format"] = 1;
    j["replications"] = sig.replications;
    j["all_converged"] = sig.all_converged;
    nlohmann::ordered_json ids = nlohmann::ordered_json::array();
    for (const auto& l : data.lawmakers) ids.push_back(l.id);
    j["lawmaker_ids"] = ids;
    j["beta"] = sig.corrected.beta;
    j["zhat"] = sig.corrected.zhat;
    nlohmann::ordered_json flg = nlohmann::ordered_json::array();
    for (const auto& row : sig.flagged) {
      nlohmann::ordered_json r = nlohmann::ordered_json::array();
      for (bool b : row) r.push_back(b ? 1 : 0);
      flg.push_back(r);
    }
    j["flagged"] = flg;
    std::ofstream out(out_path(a.common, "significance.json"), std::ios::binary);
    out << j.dump(2) << "\n";
    outputs.push_back("significance.json");
  }

  Manifest m;
  m.command = "evaluate";
  record_common(m, a.common);
  record_model_flags(m, a.mf);
  m.config["variants"] = a.variants;
  m.config["folds"] = std::to_string(a.folds);
  m.config["permutations"] = std::to_string(a.permutations);
  m.config["significance_r"] = std::to_string(a.significance_r);
  m.inputs[a.lawmakers_path] = hash_file(a.lawmakers_path);
  m.inputs[a.bills_path] = hash_file(a.bills_path);
  m.inputs[a.votes_path] = hash_file(a.votes_path);
  if (!a.mixtures_path.empty()) m.inputs[a.mixtures_path] = hash_file(a.mixtures_path);
  if (!a.direct_path.empty()) m.inputs[a.direct_path] = hash_file(a.direct_path);
  if (!a.lda_path.empty()) m.inputs[a.lda_path] = hash_file(a.lda_path);
  if (!a.labels_path.empty()) m.inputs[a.labels_path] = hash_file(a.labels_path);
  m.work["cv_fits"] = (uint64_t)report.rows.size();
  m.work["significance_fits"] = sig_fits;
  finish_manifest(m, a.common, outputs);

  for (Variant v : wanted)
    std::cout << variant_name(v) << " mean_ll=" << fmt_double(report.mean_ll(v)) << "\n";
  return 0;
}

// ---------------------------------------------------------------- explore

struct ExploreArgs {
  Common common;
  std::string params_path, lawmakers_path, significance_path;
  std::string issue, lawmaker;
  int baseline_trials = 100;
  int bins = 20;
};

int cmd_explore(const ExploreArgs& a) {
  fs::create_directories(a.common.out);
  auto fp = load_params(a.params_path);
  auto roster = load_lawmakers(a.lawmakers_path);
  std::unordered_map<std::string, const Lawmaker*> by_id;
  for (const auto& l : roster) by_id[l.id] = &l;

  std::vector<Lawmaker> ordered;
  ordered.reserve(fp.lawmaker_ids.size());
  for (const auto& id : fp.lawmaker_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw IntegrityError("lawmaker " + id + " not in " + a.lawmakers_path);
    ordered.push_back(*it->second);
  }

  int K = fp.params.K;
  int issue_k = -1;
  if (!a.issue.empty()) {
    for (int k = 0; k < K; ++k)
      if (fp.labels[k] == a.issue) issue_k = k;
    if (issue_k < 0) {
      std::string known;
      for (const auto& l : fp.labels) known += (known.empty() ? "" : ", ") + l;
      throw InvalidArgument("unknown issue '" + a.issue + "'; labels: " + known);
    }
  }

  {
    std::ofstream out(out_path(a.common, "ideal_points.csv"), std::ios::binary);
    out << "lawmaker_id,name,party,x\n";
    for (size_t u = 0; u < ordered.size(); ++u)
      out << csv_escape(ordered[u].id) << ',' << csv_escape(ordered[u].name) << ','
          << party_code(ordered[u].party) << ',' << fmt_double(fp.params.x[u]) << '\n';
  }

  std::vector<std::string> outputs{"ideal_points.csv"};
  if (K > 0) {
    std::ofstream out(out_path(a.common, "issue_points.csv"), std::ios::binary);
    out << "lawmaker_id,name,party,issue,x,effective\n";
    for (size_t u = 0; u < ordered.size(); ++u)
      for (int k = 0; k < K; ++k) {
        if (issue_k >= 0 && k != issue_k) continue;
        out << csv_escape(ordered[u].id) << ',' << csv_escape(ordered[u].name) << ','
            << party_code(ordered[u].party) << ',' << csv_escape(fp.labels[k]) << ','
            << fmt_double(fp.params.x[u]) << ','
            << fmt_double(fp.params.x[u] + fp.params.z[u][k]) << '\n';
      }
    outputs.push_back("issue_points.csv");
  } else if (!a.issue.empty()) {
    throw InvalidArgument("--issue given but the fit is classical (no issues)");
  }

  {
    // per-party histograms of effective ideal points, one group per issue;
    // the raw ideal points are written under the pseudo-issue "ideal_point"
    std::ofstream out(out_path(a.common, "histograms.csv"), std::ios::binary);
    out << "issue,party,bin_lo,bin_hi,count\n";
    auto write_hist = [&](const std::string& name, const std::vector<double>& vals) {
      double lo = *std::min_element(vals.begin(), vals.end());
      double hi = *std::max_element(vals.begin(), vals.end());
      if (hi <= lo) hi = lo + 1e-9;
      double w = (hi - lo) / a.bins;
      std::map<std::string, std::vector<long long>> counts;
      for (size_t u = 0; u < vals.size(); ++u) {
        int bin = std::min(a.bins - 1, (int)((vals[u] - lo) / w));
        auto& c = counts[party_code(ordered[u].party)];
        if (c.empty()) c.assign(a.bins, 0);
        ++c[bin];
      }
      for (const auto& [party, c] : counts)
        for (int i = 0; i < a.bins; ++i)
          out << csv_escape(name) << ',' << party << ',' << fmt_double(lo + i * w) << ','
              << fmt_double(lo + (i + 1) * w) << ',' << c[i] << '\n';
    };
    write_hist("ideal_point", fp.params.x);
    for (int k = 0; k < K; ++k) {
      if (issue_k >= 0 && k != issue_k) continue;
      std::vector<double> vals(ordered.size());
      for (size_t u = 0; u < ordered.size(); ++u)
        vals[u] = fp.params.x[u] + fp.params.z[u][k];
      write_hist(fp.labels[k], vals);
    }
    outputs.push_back("histograms.csv");
  }

  {
    auto rep = party_discriminant(fp.params, ordered);
    auto base = random_adjustment_baseline(fp.params, ordered, a.baseline_trials,
                                           derive_seed(a.common.seed, {8}));
    nlohmann::ordered_json j;
    j["format"] = 1;
    j["weights"] = rep.weights;
    j["projection_corr"] = rep.projection_corr;
    j["x_corr"] = rep.x_corr;
    j["baseline_mean"] = base.mean;
    j["baseline_sd"] = base.sd;
    j["baseline_trials"] = base.trials;
    std::ofstream out(out_path(a.common, "discriminant.json"), std::ios::binary);
    out << j.dump(2) << "\n";
    outputs.push_back("discriminant.json");
    std::cout << "projection_corr=" << fmt_double(rep.projection_corr)
              << " x_corr=" << fmt_double(rep.x_corr) << "\n";
  }

  if (!a.lawmaker.empty()) {
    if (a.significance_path.empty())
      throw InvalidArgument("--lawmaker needs --significance from evaluate");
    std::ifstream in(a.significance_path);
    if (!in) throw ParseError("cannot open " + a.significance_path);
    nlohmann::json sig;
    try {
      in >> sig;
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(a.significance_path + ": " + e.what());
    }
    auto ids = sig.at("lawmaker_ids").get<std::vector<std::string>>();
    auto it = std::find(ids.begin(), ids.end(), a.lawmaker);
    if (it == ids.end())
      throw InvalidArgument("lawmaker '" + a.lawmaker + "' not in the significance report");
    size_t u = (size_t)(it - ids.begin());
    auto zhat = sig.at("zhat").get<std::vector<std::vector<double>>>();
    auto flagged = sig.at("flagged").get<std::vector<std::vector<int>>>();
    auto fit_it = std::find(fp.lawmaker_ids.begin(), fp.lawmaker_ids.end(), a.lawmaker);
    if (fit_it == fp.lawmaker_ids.end())
      throw InvalidArgument("lawmaker '" + a.lawmaker + "' not in the fit");
    size_t fu = (size_t)(fit_it - fp.lawmaker_ids.begin());

    nlohmann::ordered_json j;
    j["format"] = 1;
    j["lawmaker_id"] = a.lawmaker;
    j["name"] = ordered[fu].name;
    j["party"] = party_code(ordered[fu].party);
    j["x"] = fp.params.x[fu];
    nlohmann::ordered_json issues = nlohmann::ordered_json::array();
    for (int k = 0; k < K && k < (int)zhat[u].size(); ++k) {
      nlohmann::ordered_json e;
      e["label"] = fp.labels[k];
      e["z"] = fp.params.z[fu][k];
      e["zhat"] = zhat[u][k];
      e["flagged"] = flagged[u][k] != 0;
      issues.push_back(e);
    }
    j["issues"] = issues;
    std::ofstream out(out_path(a.common, "lawmaker.json"), std::ios::binary);
    out << j.dump(2) << "\n";
    outputs.push_back("lawmaker.json");
  }

  Manifest m;
  m.command = "explore";
  record_common(m, a.common);
  m.config["params"] = a.params_path;
  if (!a.issue.empty()) m.config["issue"] = a.issue;
  if (!a.lawmaker.empty()) m.config["lawmaker"] = a.lawmaker;
  m.config["baseline_trials"] = std::to_string(a.baseline_trials);
  m.config["bins"] = std::to_string(a.bins);
  m.inputs[a.params_path] = hash_file(a.params_path);
  m.inputs[a.lawmakers_path] = hash_file(a.lawmakers_path);
  if (!a.significance_path.empty())
    m.inputs[a.significance_path] = hash_file(a.significance_path);
  m.work["lawmakers"] = ordered.size();
  m.work["issues"] = (uint64_t)K;
  finish_manifest(m, a.common, outputs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ideal-point models for roll-call votes with issue adjustments"};
  app.require_subcommand(1);

  PrepareArgs pa;
  auto* prepare = app.add_subcommand("prepare", "build vocabulary, topics, and issue mixtures");
  add_common(prepare, pa.common);
  prepare->add_option("--bills", pa.bills_path, "bill documents (jsonl)")->required();
  prepare->add_option("--anchors", pa.anchors_path, "anchor-text statistics (csv)");
  prepare->add_option("--good-phrases", pa.good_path, "labeled good phrases, one per line");
  prepare->add_option("--bad-phrases", pa.bad_path, "labeled bad phrases, one per line");
  prepare->add_option("--variant", pa.variant, "mixture source")
      ->check(CLI::IsMember({"classic", "issue_lda", "issue_direct", "standard_lda"}));
  prepare->add_option("--vocab-size", pa.vocab_size, "vocabulary size cap");
  prepare->add_option("--max-ngram", pa.max_ngram, "longest phrase length");
  prepare->add_option("--l2", pa.l2, "classifier L2 penalty");
  prepare->add_option("--min-label-count", pa.min_label_count, "bills per kept issue label");
  prepare->add_option("--pseudocount", pa.pseudocount, "topic smoothing pseudocount");
  prepare->add_option("--smooth-iterations", pa.smooth_iterations, "EM smoothing passes");
  prepare->add_option("--k", pa.k, "topic count for standard_lda");
  prepare->add_option("--lda-max-iter", pa.lda_max_iter, "EM iteration cap for standard_lda");
  prepare->add_option("--lda-tol", pa.lda_tol, "EM convergence tolerance for standard_lda");

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit", "fit an ideal-point model");
  add_common(fitc, fa.common);
  add_model_flags(fitc, fa.mf);
  fitc->add_option("--lawmakers", fa.lawmakers_path, "lawmakers (csv)")->required();
  fitc->add_option("--bills", fa.bills_path, "bills (jsonl)")->required();
  fitc->add_option("--votes", fa.votes_path, "votes (csv)")->required();
  fitc->add_option("--mixtures", fa.mixtures_path, "issue mixtures (csv)");
  fitc->add_option("--labels", fa.labels_path, "issue labels, one per line");
  fitc->add_option("--variant", fa.variant, "model variant")
      ->check(CLI::IsMember(
          {"auto", "classic", "issue_lda", "issue_direct", "issue_permuted", "standard_lda"}));
  fitc->add_option("--permutation-rep", fa.permutation_rep,
                   "replicate index for issue_permuted");
  fitc->add_flag("--resume", fa.resume, "resume from checkpoint.json in --out");

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "cross-validate model variants");
  add_common(evaluate, ea.common);
  add_model_flags(evaluate, ea.mf);
  evaluate->add_option("--lawmakers", ea.lawmakers_path, "lawmakers (csv)")->required();
  evaluate->add_option("--bills", ea.bills_path, "bills (jsonl)")->required();
  evaluate->add_option("--votes", ea.votes_path, "votes (csv)")->required();
  evaluate->add_option("--mixtures", ea.mixtures_path, "issue mixtures for issue_lda/permuted");
  evaluate->add_option("--direct-mixtures", ea.direct_path, "mixtures for issue_direct");
  evaluate->add_option("--lda-mixtures", ea.lda_path, "mixtures for standard_lda");
  evaluate->add_option("--labels", ea.labels_path, "issue labels, one per line");
  evaluate->add_option("--variants", ea.variants, "comma-separated variant list");
  evaluate->add_option("--folds", ea.folds, "cross-validation folds");
  evaluate->add_option("--permutations", ea.permutations, "null-model permutation count");
  evaluate->add_option("--significance-r", ea.significance_r,
                       "permutation replications for the significance test (0 skips)");

  ExploreArgs xa;
  auto* explore = app.add_subcommand("explore", "export plot-ready views of a fit");
  add_common(explore, xa.common);
  explore->add_option("--params", xa.params_path, "fitted parameters (json)")->required();
  explore->add_option("--lawmakers", xa.lawmakers_path, "lawmakers (csv)")->required();
  explore->add_option("--significance", xa.significance_path, "significance report from evaluate");
  explore->add_option("--issue", xa.issue, "restrict exports to one issue label");
  explore->add_option("--lawmaker", xa.lawmaker, "write one lawmaker's flagged issues");
  explore->add_option("--baseline-trials", xa.baseline_trials, "random-adjustment trials");
  explore->add_option("--bins", xa.bins, "histogram bins");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors are exit 1, help stays 0
  }

  try {
    if (prepare->parsed()) return cmd_prepare(pa);
    if (fitc->parsed()) return cmd_fit(fa);
    if (evaluate->parsed()) return cmd_evaluate(ea);
    if (explore->parsed()) return cmd_explore(xa);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DegenerateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
