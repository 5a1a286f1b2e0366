#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rollcall/corpus.hpp"
#include "rollcall/inference.hpp"
#include "rollcall/model.hpp"

namespace rollcall {

// Fitted parameters plus the id universe they cover, so heldout votes that
// reference entities absent from training can be excluded and counted.
struct IndexedParams {
  ModelParams params;
  std::unordered_map<std::string, int> lawmaker_of;
  std::unordered_map<std::string, int> bill_of;
};

IndexedParams index_params(const ModelParams& params, const RollCallDataset& data);

struct HeldoutStats {
  double mean_ll = 0;
  size_t n_eval = 0;
  size_t n_excluded = 0;
};

HeldoutStats heldout_loglik(const IndexedParams& fit, const std::vector<VoteRecord>& votes,
                            const MixtureMap& mixtures);

double accuracy(const IndexedParams& fit, const std::vector<VoteRecord>& votes,
                const MixtureMap& mixtures);

enum class Variant { Classic, IssueLda, IssueDirect, IssuePermuted, StandardLda };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& s);

struct CvRow {
  Variant variant = Variant::Classic;
  int fold = 0;
  int permutation = -1;  // replication index for the permuted variant
  double mean_ll = 0;
  double accuracy = 0;
  size_t n_eval = 0;
  size_t n_excluded = 0;
  bool converged = true;
};

struct IssueImprovement {
  std::string label;
  double imp = 0;
  double weight_sum = 0;
  bool defined = false;
};

struct CvReport {
  std::vector<CvRow> rows;
  // cross-fold aggregate heldout improvement, present when both the classic
  // and an issue variant were evaluated
  std::vector<IssueImprovement> improvements;
  size_t votes_improved = 0;  // classic wrong, issue right
  size_t votes_worsened = 0;

  double mean_ll(Variant v) const;
};

struct CvOptions {
  int n_folds = 6;
  int permutations = 5;  // replications of the permuted-mixture variant
  uint64_t seed = 0;
  int threads = 1;
  FixedVariances variances;
};

CvReport cross_validate(const RollCallDataset& data,
                        const std::map<Variant, std::vector<IssueMixture>>& mixtures_by_variant,
                        const Hyperparams& hp, const UpdateSchedule& schedule,
                        const CvOptions& options, const std::vector<std::string>& labels);

std::vector<IssueImprovement> issue_improvement(const std::vector<VoteRecord>& votes,
                                                const IndexedParams& issue,
                                                const IndexedParams& classic,
                                                const MixtureMap& mixtures,
                                                const std::vector<std::string>& labels);

struct CorrectedAdjustments {
  std::vector<double> beta;                // per-issue slope of z on x
  std::vector<std::vector<double>> zhat;   // residuals, lawmakers x K
};

CorrectedAdjustments corrected_adjustments(const ModelParams& params);

struct SignificanceReport {
  CorrectedAdjustments corrected;
  std::vector<std::vector<bool>> flagged;  // lawmakers x K
  int replications = 0;
  bool all_converged = true;
};

SignificanceReport permutation_significance(const RollCallDataset& data,
                                            const std::vector<IssueMixture>& mixtures,
                                            const Hyperparams& hp,
                                            const UpdateSchedule& schedule, int R,
                                            uint64_t seed, int threads = 1,
                                            const FixedVariances& variances = {});

struct DiscriminantReport {
  std::vector<double> weights;      // over (x, z_1..z_K)
  double projection_corr = 0;       // corr(rescaled projection, party +-1)
  double x_corr = 0;                // corr(x, party +-1)
};

DiscriminantReport party_discriminant(const ModelParams& params,
                                      const std::vector<Lawmaker>& lawmakers);

struct BaselineStats {
  double mean = 0;
  double sd = 0;
  int trials = 0;
};

BaselineStats random_adjustment_baseline(const ModelParams& params,
                                         const std::vector<Lawmaker>& lawmakers, int trials,
                                         uint64_t seed);

}  // namespace rollcall
