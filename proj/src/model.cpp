#include "rollcall/model.hpp"

#include <cmath>
#include <cstdio>

#include "rollcall/errors.hpp"
#include "rollcall/rng.hpp"

namespace rollcall {

double logistic(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  double e = std::exp(s);
  return e / (1.0 + e);
}

double log1pexp(double t) {
  if (t > 0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double log_bernoulli(bool yea, double logit) {
  return (yea ? logit : 0.0) - log1pexp(logit);
}

double log_gaussian(double v, double mean, double var) {
  double d = v - mean;
  return -0.5 * std::log(2.0 * M_PI * var) - d * d / (2.0 * var);
}

double log_laplace(double v, double rate) {
  return std::log(rate / 2.0) - rate * std::fabs(v);
}

double vote_logit(int u, int d, const ModelParams& p, const std::vector<double>* theta) {
  double pos = p.x.at(u);
  if (theta) {
    if (int(theta->size()) != p.K) throw DimensionError("mixture length does not match K");
    const auto& zu = p.z.at(u);
    for (int k = 0; k < p.K; ++k) pos += zu[k] * (*theta)[k];
  }
  return pos * p.a.at(d) + p.b.at(d);
}

double vote_probability(int u, int d, const ModelParams& p, const std::vector<double>* theta) {
  return logistic(vote_logit(u, d, p, theta));
}

double effective_ideal_point(int u, const ModelParams& p, const std::vector<double>& theta) {
  if (int(theta.size()) != p.K) throw DimensionError("mixture length does not match K");
  double pos = p.x.at(u);
  const auto& zu = p.z.at(u);
  for (int k = 0; k < p.K; ++k) pos += zu[k] * theta[k];
  return pos;
}

double cut_point(int d, const ModelParams& p) {
  double a = p.a.at(d);
  if (a == 0.0) throw DegenerateError("cut point undefined for zero polarity");
  return -p.b.at(d) / a;
}

MixtureMap mixture_map(const std::vector<IssueMixture>& mixtures) {
  MixtureMap m;
  for (const auto& mx : mixtures) {
    if (!m.emplace(mx.bill_id, mx.theta).second)
      throw IntegrityError("duplicate mixture for bill '" + mx.bill_id + "'");
  }
  return m;
}

double log_joint(const ModelParams& p, const RollCallDataset& data,
                 const std::vector<IssueMixture>& mixtures, const Hyperparams& hp) {
  auto lm_of = data.lawmaker_index();
  auto bill_of = data.bill_index();
  auto mix = mixture_map(mixtures);

  double lp = 0;
  for (const auto& v : data.votes) {
    int u = lm_of.at(v.lawmaker_id);
    int d = bill_of.at(v.bill_id);
    const std::vector<double>* theta = nullptr;
    if (p.K > 0) {
      auto it = mix.find(v.bill_id);
      if (it == mix.end())
        throw DimensionError("no mixture for voted-on bill '" + v.bill_id + "'");
      theta = &it->second;
    }
    lp += log_bernoulli(v.yea, vote_logit(u, d, p, theta));
  }
  for (double xu : p.x) lp += log_gaussian(xu, 0.0, hp.prior_var_x);
  if (p.K > 0)
    for (const auto& zu : p.z)
      for (double zk : zu) lp += log_laplace(zk, hp.lambda1);
  for (double ad : p.a) lp += log_gaussian(ad, 0.0, hp.prior_var_a);
  for (double bd : p.b) lp += log_gaussian(bd, 0.0, hp.prior_var_b);
  return lp;
}

namespace {

std::string padded_id(const char* prefix, int i, int total) {
  size_t width = 1;
  for (int t = total - 1; t >= 10; t /= 10) ++width;
  std::string digits = std::to_string(i);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

SyntheticTruth sample_synthetic(int U, int D, int K, const Hyperparams& hp,
                                MixtureSource source, double alpha, uint64_t seed) {
  if (U < 1 || D < 1 || K < 1) throw InvalidArgument("U, D, K must be at least 1");
  if (alpha <= 0) alpha = 1.0 / K;
  Rng rng(derive_seed(seed, {0x5A17}));

  SyntheticTruth t;
  t.seed = seed;
  t.params.K = K;
  t.params.x.resize(U);
  t.params.z.assign(U, std::vector<double>(K));
  for (int u = 0; u < U; ++u) t.params.x[u] = rng.normal() * std::sqrt(hp.prior_var_x);
  for (int u = 0; u < U; ++u)
    for (int k = 0; k < K; ++k) t.params.z[u][k] = rng.laplace(hp.lambda1);
  t.params.a.resize(D);
  t.params.b.resize(D);
  for (int d = 0; d < D; ++d) t.params.a[d] = rng.normal() * std::sqrt(hp.prior_var_a);
  for (int d = 0; d < D; ++d) t.params.b[d] = rng.normal() * std::sqrt(hp.prior_var_b);

  std::vector<Lawmaker> lawmakers(U);
  for (int u = 0; u < U; ++u) {
    lawmakers[u].id = padded_id("L", u, U);
    lawmakers[u].name = lawmakers[u].id;
    lawmakers[u].party = t.params.x[u] >= 0 ? Party::Republican : Party::Democrat;
    lawmakers[u].chamber = Chamber::House;
  }
  std::vector<BillDoc> bills(D);
  t.mixtures.resize(D);
  for (int d = 0; d < D; ++d) {
    bills[d].id = padded_id("B", d, D);
    bills[d].title = bills[d].id;
    t.mixtures[d].bill_id = bills[d].id;
    if (source == MixtureSource::Dirichlet) {
      t.mixtures[d].theta = rng.dirichlet(alpha, K);
    } else {
      t.mixtures[d].theta.assign(K, 0.0);
      t.mixtures[d].theta[rng.below(K)] = 1.0;
    }
  }

  std::vector<VoteRecord> votes;
  votes.reserve(size_t(U) * size_t(D));
  for (int u = 0; u < U; ++u)
    for (int d = 0; d < D; ++d) {
      double p = vote_probability(u, d, t.params, &t.mixtures[d].theta);
      votes.push_back({lawmakers[u].id, bills[d].id, rng.uniform() < p});
    }
  t.dataset = assemble_dataset(std::move(lawmakers), std::move(bills), std::move(votes));
  return t;
}

void redraw_votes(SyntheticTruth& t, uint64_t seed) {
  Rng rng(derive_seed(seed, {0x7E4}));
  auto lm_of = t.dataset.lawmaker_index();
  auto bill_of = t.dataset.bill_index();
  auto mix = mixture_map(t.mixtures);
  for (auto& v : t.dataset.votes) {
    int u = lm_of.at(v.lawmaker_id);
    int d = bill_of.at(v.bill_id);
    double p = vote_probability(u, d, t.params, &mix.at(v.bill_id));
    v.yea = rng.uniform() < p;
  }
  // parties track the generator's sign convention, not the redrawn votes
  for (auto& lm : t.dataset.lawmakers)
    lm.party = t.params.x[lm_of.at(lm.id)] >= 0 ? Party::Republican : Party::Democrat;
}

}  // namespace rollcall
