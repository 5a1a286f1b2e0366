#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rollcall/corpus.hpp"
#include "rollcall/topics.hpp"

namespace rollcall {

struct Hyperparams {
  double lambda1 = 1.0;  // Laplace rate on issue adjustments
  double prior_var_x = 1.0;
  double prior_var_a = 1.0;
  double prior_var_b = 1.0;
};

// K = 0 is the classical model: z is empty and theta is never read.
struct ModelParams {
  std::vector<double> x;
  std::vector<std::vector<double>> z;  // lawmakers x K
  std::vector<double> a;
  std::vector<double> b;
  int K = 0;
};

double logistic(double s);
double log1pexp(double t);
double log_bernoulli(bool yea, double logit);

double log_gaussian(double v, double mean, double var);
double log_laplace(double v, double rate);

// theta == nullptr selects the classical likelihood
double vote_logit(int u, int d, const ModelParams& p, const std::vector<double>* theta);
double vote_probability(int u, int d, const ModelParams& p, const std::vector<double>* theta);
double effective_ideal_point(int u, const ModelParams& p, const std::vector<double>& theta);
double cut_point(int d, const ModelParams& p);

using MixtureMap = std::unordered_map<std::string, std::vector<double>>;
MixtureMap mixture_map(const std::vector<IssueMixture>& mixtures);

double log_joint(const ModelParams& p, const RollCallDataset& data,
                 const std::vector<IssueMixture>& mixtures, const Hyperparams& hp);

enum class MixtureSource { Dirichlet, OneHot };

struct SyntheticTruth {
  ModelParams params;
  std::vector<IssueMixture> mixtures;
  RollCallDataset dataset;
  uint64_t seed = 0;
};

// Draws x,a,b from their Gaussian priors, z rows from Laplace(lambda1),
// theta from the chosen source, and a complete vote matrix from the
// issue-adjusted likelihood. Party is R for x >= 0, D otherwise, so the
// sign convention is identifiable by construction.
SyntheticTruth sample_synthetic(int U, int D, int K, const Hyperparams& hp,
                                MixtureSource source, double alpha, uint64_t seed);

// Redraws the vote matrix in place from the current params/mixtures.
void redraw_votes(SyntheticTruth& truth, uint64_t seed);

}  // namespace rollcall
