#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "rollcall/corpus.hpp"
#include "rollcall/errors.hpp"
#include "rollcall/eval.hpp"
#include "rollcall/inference.hpp"
#include "rollcall/io.hpp"
#include "rollcall/model.hpp"
#include "rollcall/rng.hpp"
#include "rollcall/topics.hpp"
#include "rollcall/vocab.hpp"

namespace py = pybind11;
using namespace rollcall;

PYBIND11_MODULE(_core, m) {
  m.doc() = "ideal-point models for roll-call votes with issue adjustments";

  auto err = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", err);
  py::register_exception<IntegrityError>(m, "IntegrityError", err);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", err);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", err);
  py::register_exception<EmptyModelError>(m, "EmptyModelError", err);
  py::register_exception<EmptyDocumentError>(m, "EmptyDocumentError", err);
  py::register_exception<UnlabeledBillError>(m, "UnlabeledBillError", err);
  py::register_exception<DimensionError>(m, "DimensionError", err);
  py::register_exception<DegenerateError>(m, "DegenerateError", err);
  py::register_exception<IdentificationError>(m, "IdentificationError", err);

  // ------------------------------------------------------------- corpus
  py::enum_<Party>(m, "Party")
      .value("Democrat", Party::Democrat)
      .value("Republican", Party::Republican)
      .value("Other", Party::Other);
  py::enum_<Chamber>(m, "Chamber")
      .value("House", Chamber::House)
      .value("Senate", Chamber::Senate);

  py::class_<Lawmaker>(m, "Lawmaker")
      .def(py::init<>())
      .def(py::init<std::string, std::string, Party, Chamber>(), py::arg("id"),
           py::arg("name") = "", py::arg("party") = Party::Other,
           py::arg("chamber") = Chamber::House)
      .def_readwrite("id", &Lawmaker::id)
      .def_readwrite("name", &Lawmaker::name)
      .def_readwrite("party", &Lawmaker::party)
      .def_readwrite("chamber", &Lawmaker::chamber);

  py::class_<BillDoc>(m, "BillDoc")
      .def(py::init<>())
      .def(py::init<std::string, std::string, std::vector<std::string>,
                    std::vector<std::string>>(),
           py::arg("id"), py::arg("title") = "",
           py::arg("tokens") = std::vector<std::string>{},
           py::arg("labels") = std::vector<std::string>{})
      .def_readwrite("id", &BillDoc::id)
      .def_readwrite("title", &BillDoc::title)
      .def_readwrite("tokens", &BillDoc::tokens)
      .def_readwrite("labels", &BillDoc::labels);

  py::class_<VoteRecord>(m, "VoteRecord")
      .def(py::init<>())
      .def(py::init<std::string, std::string, bool>(), py::arg("lawmaker_id"),
           py::arg("bill_id"), py::arg("yea"))
      .def_readwrite("lawmaker_id", &VoteRecord::lawmaker_id)
      .def_readwrite("bill_id", &VoteRecord::bill_id)
      .def_readwrite("yea", &VoteRecord::yea);

  py::class_<RollCallDataset>(m, "RollCallDataset")
      .def(py::init<>())
      .def_readwrite("lawmakers", &RollCallDataset::lawmakers)
      .def_readwrite("bills", &RollCallDataset::bills)
      .def_readwrite("votes", &RollCallDataset::votes)
      .def_readonly("dropped_votes", &RollCallDataset::dropped_votes)
      .def_readonly("dropped_lawmakers", &RollCallDataset::dropped_lawmakers)
      .def_readonly("dropped_bills", &RollCallDataset::dropped_bills);

  py::class_<FoldAssignment>(m, "FoldAssignment")
      .def_readonly("n_folds", &FoldAssignment::n_folds)
      .def_readonly("seed", &FoldAssignment::seed)
      .def_readonly("fold_of_vote", &FoldAssignment::fold_of_vote);

  m.def("load_lawmakers", &load_lawmakers, py::arg("path"));
  m.def("load_bills", &load_bills, py::arg("path"));
  m.def("load_votes",
        [](const std::string& path) { return load_votes(path); }, py::arg("path"));
  m.def("save_lawmakers", &save_lawmakers, py::arg("lawmakers"), py::arg("path"));
  m.def("save_bills", &save_bills, py::arg("bills"), py::arg("path"));
  m.def("save_votes", &save_votes, py::arg("votes"), py::arg("path"));
  m.def("assemble_dataset", &assemble_dataset, py::arg("lawmakers"), py::arg("bills"),
        py::arg("votes"));
  m.def("load_dataset", &load_dataset, py::arg("lawmakers_path"), py::arg("bills_path"),
        py::arg("votes_path"));
  m.def("split_folds", &split_folds, py::arg("data"), py::arg("n_folds"), py::arg("seed"));

  // -------------------------------------------------------------- vocab
  py::class_<PhraseStats>(m, "PhraseStats")
      .def_readonly("phrase", &PhraseStats::phrase)
      .def_readonly("corpus_count", &PhraseStats::corpus_count)
      .def_readonly("doc_count", &PhraseStats::doc_count)
      .def_readonly("corpus_fraction", &PhraseStats::corpus_fraction);

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_readonly("phrases", &Vocabulary::phrases)
      .def_readonly("index", &Vocabulary::index);

  m.def("extract_phrases", &extract_phrases, py::arg("bills"), py::arg("max_len") = 5,
        py::arg("threads") = 1);
  m.def("filter_phrases", &filter_phrases, py::arg("stats"), py::arg("n_bills"),
        py::arg("max_doc_frac") = 0.10, py::arg("min_docs") = 4,
        py::arg("min_corpus_frac") = 1e-5);
  m.def("vocabulary_from_phrases", &vocabulary_from_phrases, py::arg("phrases"));
  m.def("bag_of_phrases", &bag_of_phrases, py::arg("doc"), py::arg("vocab"));
  m.def("save_vocabulary", &save_vocabulary, py::arg("vocab"), py::arg("path"));
  m.def("load_vocabulary", &load_vocabulary, py::arg("path"));

  // ------------------------------------------------------------- topics
  py::class_<Topic>(m, "Topic")
      .def_readonly("label", &Topic::label)
      .def_readonly("word_dist", &Topic::word_dist);

  py::class_<TopicModel>(m, "TopicModel")
      .def_readonly("topics", &TopicModel::topics)
      .def_readonly("alpha", &TopicModel::alpha)
      .def_property_readonly("K", &TopicModel::K)
      .def("labels", &TopicModel::labels);

  py::class_<IssueMixture>(m, "IssueMixture")
      .def(py::init<>())
      .def(py::init<std::string, std::vector<double>>(), py::arg("bill_id"),
           py::arg("theta"))
      .def_readwrite("bill_id", &IssueMixture::bill_id)
      .def_readwrite("theta", &IssueMixture::theta);

  py::class_<LdaFit>(m, "LdaFit")
      .def_readonly("model", &LdaFit::model)
      .def_readonly("converged", &LdaFit::converged)
      .def_readonly("iterations", &LdaFit::iterations)
      .def_readonly("objective", &LdaFit::objective);

  m.def("build_labeled_topics", &build_labeled_topics, py::arg("bills"), py::arg("vocab"),
        py::arg("min_label_count") = 25, py::arg("pseudocount") = 0.01);
  m.def("smooth_topics", &smooth_topics, py::arg("model"), py::arg("bills"), py::arg("vocab"),
        py::arg("iterations") = 2, py::arg("pseudocount") = 0.01);
  m.def("infer_mixture", &infer_mixture, py::arg("doc"), py::arg("model"), py::arg("vocab"),
        py::arg("tol") = 1e-5, py::arg("max_iter") = 200);
  m.def("infer_all_mixtures", &infer_all_mixtures, py::arg("bills"), py::arg("model"),
        py::arg("vocab"), py::arg("tol") = 1e-5, py::arg("max_iter") = 200,
        py::arg("threads") = 1);
  m.def("encode_direct_labels", &encode_direct_labels, py::arg("bills"), py::arg("labels"));
  m.def("permute_mixtures", &permute_mixtures, py::arg("mixtures"), py::arg("seed"));
  m.def("fit_unsupervised_lda", &fit_unsupervised_lda, py::arg("bills"), py::arg("vocab"),
        py::arg("k"), py::arg("seed"), py::arg("max_iter") = 100, py::arg("tol") = 1e-5,
        py::arg("alpha") = -1.0, py::arg("threads") = 1);

  // -------------------------------------------------------------- model
  py::class_<Hyperparams>(m, "Hyperparams")
      .def(py::init<>())
      .def_readwrite("lambda1", &Hyperparams::lambda1)
      .def_readwrite("prior_var_x", &Hyperparams::prior_var_x)
      .def_readwrite("prior_var_a", &Hyperparams::prior_var_a)
      .def_readwrite("prior_var_b", &Hyperparams::prior_var_b);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("x", &ModelParams::x)
      .def_readwrite("z", &ModelParams::z)
      .def_readwrite("a", &ModelParams::a)
      .def_readwrite("b", &ModelParams::b)
      .def_readwrite("K", &ModelParams::K);

  py::enum_<MixtureSource>(m, "MixtureSource")
      .value("Dirichlet", MixtureSource::Dirichlet)
      .value("OneHot", MixtureSource::OneHot);

  py::class_<SyntheticTruth>(m, "SyntheticTruth")
      .def_readwrite("params", &SyntheticTruth::params)
      .def_readwrite("mixtures", &SyntheticTruth::mixtures)
      .def_readwrite("dataset", &SyntheticTruth::dataset)
      .def_readonly("seed", &SyntheticTruth::seed);

  m.def("logistic", &logistic, py::arg("s"));
  m.def("log1pexp", &log1pexp, py::arg("t"));
  m.def("log_bernoulli", &log_bernoulli, py::arg("yea"), py::arg("logit"));
  m.def(
      "vote_probability",
      [](int u, int d, const ModelParams& p, const std::optional<std::vector<double>>& theta) {
        return vote_probability(u, d, p, theta ? &*theta : nullptr);
      },
      py::arg("u"), py::arg("d"), py::arg("params"), py::arg("theta") = py::none());
  m.def("effective_ideal_point", &effective_ideal_point, py::arg("u"), py::arg("params"),
        py::arg("theta"));
  m.def("cut_point", &cut_point, py::arg("d"), py::arg("params"));
  m.def("log_joint", &log_joint, py::arg("params"), py::arg("data"), py::arg("mixtures"),
        py::arg("hp"));
  m.def("sample_synthetic", &sample_synthetic, py::arg("u"), py::arg("d"), py::arg("k"),
        py::arg("hp"), py::arg("source"), py::arg("alpha"), py::arg("seed"));
  m.def(
      "redraw_votes", [](SyntheticTruth& truth, uint64_t seed) { redraw_votes(truth, seed); },
      py::arg("truth"), py::arg("seed"));
  m.def("derive_seed",
        [](uint64_t base, const std::vector<uint64_t>& tags) {
          uint64_t s = splitmix64(base);
          for (uint64_t t : tags) s = splitmix64(s ^ t);
          return s;
        },
        py::arg("base"), py::arg("tags"));

  // ---------------------------------------------------------- inference
  py::class_<VariationalState>(m, "VariationalState")
      .def(py::init<>())
      .def_readwrite("mean_x", &VariationalState::mean_x)
      .def_readwrite("mean_z", &VariationalState::mean_z)
      .def_readwrite("mean_a", &VariationalState::mean_a)
      .def_readwrite("mean_b", &VariationalState::mean_b)
      .def_readwrite("var_x", &VariationalState::var_x)
      .def_readwrite("var_z", &VariationalState::var_z)
      .def_readwrite("var_a", &VariationalState::var_a)
      .def_readwrite("var_b", &VariationalState::var_b)
      .def_readwrite("K", &VariationalState::K)
      .def("means", &VariationalState::means);

  py::class_<FixedVariances>(m, "FixedVariances")
      .def(py::init<>())
      .def_readwrite("var_x", &FixedVariances::var_x)
      .def_readwrite("var_z", &FixedVariances::var_z)
      .def_readwrite("var_a", &FixedVariances::var_a)
      .def_readwrite("var_b", &FixedVariances::var_b);

  py::class_<UpdateSchedule>(m, "UpdateSchedule")
      .def(py::init<>())
      .def_readwrite("m_init", &UpdateSchedule::m_init)
      .def_readwrite("m_growth", &UpdateSchedule::m_growth)
      .def_readwrite("m_max", &UpdateSchedule::m_max)
      .def_readwrite("ema_decay", &UpdateSchedule::ema_decay)
      .def_readwrite("ema_threshold", &UpdateSchedule::ema_threshold)
      .def_readwrite("step_cap", &UpdateSchedule::step_cap)
      .def_readwrite("max_sweeps", &UpdateSchedule::max_sweeps);

  py::class_<FitCheckpoint>(m, "FitCheckpoint")
      .def(py::init<>())
      .def_readwrite("state", &FitCheckpoint::state)
      .def_readwrite("sweeps_done", &FitCheckpoint::sweeps_done)
      .def_readwrite("m", &FitCheckpoint::m)
      .def_readwrite("ema", &FitCheckpoint::ema)
      .def_readwrite("prev_elbo", &FitCheckpoint::prev_elbo)
      .def_readwrite("elbo_trace", &FitCheckpoint::elbo_trace)
      .def_readwrite("skipped_updates", &FitCheckpoint::skipped_updates);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("state", &FitResult::state)
      .def_readonly("elbo_trace", &FitResult::elbo_trace)
      .def_readonly("sweeps", &FitResult::sweeps)
      .def_readonly("identified", &FitResult::identified)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("skipped_updates", &FitResult::skipped_updates)
      .def_readonly("final_m", &FitResult::final_m);

  m.def("qmc_marginal_samples", &qmc_marginal_samples, py::arg("mean"), py::arg("var"),
        py::arg("m"), py::arg("seed"));
  m.def("estimate_elbo", &estimate_elbo, py::arg("state"), py::arg("data"),
        py::arg("mixtures"), py::arg("hp"), py::arg("m"), py::arg("seed"));
  m.def(
      "identify_signs",
      [](VariationalState& s, const std::vector<Lawmaker>& lm) { return identify_signs(s, lm); },
      py::arg("state"), py::arg("lawmakers"));
  m.def(
      "identify_signs",
      [](ModelParams& p, const std::vector<Lawmaker>& lm) { return identify_signs(p, lm); },
      py::arg("params"), py::arg("lawmakers"));
  m.def(
      "fit",
      [](const RollCallDataset& data, const std::vector<IssueMixture>& mixtures,
         const Hyperparams& hp, const UpdateSchedule& schedule, uint64_t seed, int threads,
         const FixedVariances& variances, const std::optional<FitCheckpoint>& resume,
         const SweepCallback& on_sweep) {
        return fit(data, mixtures, hp, schedule, seed, threads, variances,
                   resume ? &*resume : nullptr, on_sweep);
      },
      py::arg("data"), py::arg("mixtures"), py::arg("hp"), py::arg("schedule"),
      py::arg("seed"), py::arg("threads") = 1, py::arg("variances") = FixedVariances{},
      py::arg("resume") = py::none(), py::arg("on_sweep") = py::none());

  // ---------------------------------------------------------------- eval
  py::enum_<Variant>(m, "Variant")
      .value("Classic", Variant::Classic)
      .value("IssueLda", Variant::IssueLda)
      .value("IssueDirect", Variant::IssueDirect)
      .value("IssuePermuted", Variant::IssuePermuted)
      .value("StandardLda", Variant::StandardLda);

  py::class_<HeldoutStats>(m, "HeldoutStats")
      .def_readonly("mean_ll", &HeldoutStats::mean_ll)
      .def_readonly("n_eval", &HeldoutStats::n_eval)
      .def_readonly("n_excluded", &HeldoutStats::n_excluded);

  py::class_<CvRow>(m, "CvRow")
      .def_readonly("variant", &CvRow::variant)
      .def_readonly("fold", &CvRow::fold)
      .def_readonly("permutation", &CvRow::permutation)
      .def_readonly("mean_ll", &CvRow::mean_ll)
      .def_readonly("accuracy", &CvRow::accuracy)
      .def_readonly("n_eval", &CvRow::n_eval)
      .def_readonly("n_excluded", &CvRow::n_excluded)
      .def_readonly("converged", &CvRow::converged);

  py::class_<IssueImprovement>(m, "IssueImprovement")
      .def_readonly("label", &IssueImprovement::label)
      .def_readonly("imp", &IssueImprovement::imp)
      .def_readonly("weight_sum", &IssueImprovement::weight_sum)
      .def_readonly("defined", &IssueImprovement::defined);

  py::class_<CvReport>(m, "CvReport")
      .def_readonly("rows", &CvReport::rows)
      .def_readonly("improvements", &CvReport::improvements)
      .def_readonly("votes_improved", &CvReport::votes_improved)
      .def_readonly("votes_worsened", &CvReport::votes_worsened)
      .def("mean_ll", &CvReport::mean_ll, py::arg("variant"));

  py::class_<CvOptions>(m, "CvOptions")
      .def(py::init<>())
      .def_readwrite("n_folds", &CvOptions::n_folds)
      .def_readwrite("permutations", &CvOptions::permutations)
      .def_readwrite("seed", &CvOptions::seed)
      .def_readwrite("threads", &CvOptions::threads)
      .def_readwrite("variances", &CvOptions::variances);

  py::class_<CorrectedAdjustments>(m, "CorrectedAdjustments")
      .def_readonly("beta", &CorrectedAdjustments::beta)
      .def_readonly("zhat", &CorrectedAdjustments::zhat);

  py::class_<SignificanceReport>(m, "SignificanceReport")
      .def_readonly("corrected", &SignificanceReport::corrected)
      .def_readonly("flagged", &SignificanceReport::flagged)
      .def_readonly("replications", &SignificanceReport::replications)
      .def_readonly("all_converged", &SignificanceReport::all_converged);

  py::class_<DiscriminantReport>(m, "DiscriminantReport")
      .def_readonly("weights", &DiscriminantReport::weights)
      .def_readonly("projection_corr", &DiscriminantReport::projection_corr)
      .def_readonly("x_corr", &DiscriminantReport::x_corr);

  py::class_<BaselineStats>(m, "BaselineStats")
      .def_readonly("mean", &BaselineStats::mean)
      .def_readonly("sd", &BaselineStats::sd)
      .def_readonly("trials", &BaselineStats::trials);

  m.def(
      "heldout_loglik",
      [](const ModelParams& params, const RollCallDataset& train,
         const std::vector<VoteRecord>& votes, const std::vector<IssueMixture>& mixtures) {
        return heldout_loglik(index_params(params, train), votes, mixture_map(mixtures));
      },
      py::arg("params"), py::arg("train"), py::arg("votes"),
      py::arg("mixtures") = std::vector<IssueMixture>{});
  m.def(
      "accuracy",
      [](const ModelParams& params, const RollCallDataset& train,
         const std::vector<VoteRecord>& votes, const std::vector<IssueMixture>& mixtures) {
        return accuracy(index_params(params, train), votes, mixture_map(mixtures));
      },
      py::arg("params"), py::arg("train"), py::arg("votes"),
      py::arg("mixtures") = std::vector<IssueMixture>{});
  m.def("cross_validate", &cross_validate, py::arg("data"), py::arg("mixtures_by_variant"),
        py::arg("hp"), py::arg("schedule"), py::arg("options"),
        py::arg("labels") = std::vector<std::string>{});
  m.def("corrected_adjustments", &corrected_adjustments, py::arg("params"));
  m.def("permutation_significance", &permutation_significance, py::arg("data"),
        py::arg("mixtures"), py::arg("hp"), py::arg("schedule"), py::arg("r"), py::arg("seed"),
        py::arg("threads") = 1, py::arg("variances") = FixedVariances{});
  m.def("party_discriminant", &party_discriminant, py::arg("params"), py::arg("lawmakers"));
  m.def("random_adjustment_baseline", &random_adjustment_baseline, py::arg("params"),
        py::arg("lawmakers"), py::arg("trials"), py::arg("seed"));

  // ------------------------------------------------------------------ io
  py::class_<FittedParams>(m, "FittedParams")
      .def(py::init<>())
      .def_readwrite("params", &FittedParams::params)
      .def_readwrite("lawmaker_ids", &FittedParams::lawmaker_ids)
      .def_readwrite("bill_ids", &FittedParams::bill_ids)
      .def_readwrite("labels", &FittedParams::labels)
      .def_readwrite("hp", &FittedParams::hp);

  m.def("save_params", &save_params, py::arg("path"), py::arg("fitted"));
  m.def("load_params", &load_params, py::arg("path"));
  m.def("save_mixtures", &save_mixtures, py::arg("path"), py::arg("mixtures"));
  m.def("load_mixtures", &load_mixtures, py::arg("path"));
  m.def("save_topic_model", &save_topic_model, py::arg("path"), py::arg("model"));
  m.def("load_topic_model", &load_topic_model, py::arg("path"));
  m.def("save_trace", &save_trace, py::arg("path"), py::arg("elbo_trace"));
  m.def("load_trace", &load_trace, py::arg("path"));
  m.def("verify_manifest", &verify_manifest, py::arg("manifest_path"));
}
