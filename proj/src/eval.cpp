#include "rollcall/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "rollcall/errors.hpp"
#include "rollcall/par.hpp"
#include "rollcall/rng.hpp"
#include "rollcall/topics.hpp"

namespace rollcall {

namespace {

// logit of a heldout vote at the variational means; false when the vote
// references an entity (or mixture) the fit has never seen
bool heldout_logit(const IndexedParams& fit, const VoteRecord& v, const MixtureMap& mixtures,
                   double& logit) {
  auto lu = fit.lawmaker_of.find(v.lawmaker_id);
  auto ld = fit.bill_of.find(v.bill_id);
  if (lu == fit.lawmaker_of.end() || ld == fit.bill_of.end()) return false;
  const std::vector<double>* theta = nullptr;
  if (fit.params.K > 0) {
    auto mt = mixtures.find(v.bill_id);
    if (mt == mixtures.end()) return false;
    theta = &mt->second;
  }
  logit = vote_logit(lu->second, ld->second, fit.params, theta);
  return true;
}

std::vector<std::string> issue_labels(const std::vector<std::string>& labels, int K) {
  if (int(labels.size()) == K) return labels;
  std::vector<std::string> out(K);
  for (int k = 0; k < K; ++k) out[k] = "issue-" + std::to_string(k);
  return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  size_t n = a.size();
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0 || sbb <= 0) throw DegenerateError("constant vector in correlation");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

IndexedParams index_params(const ModelParams& params, const RollCallDataset& data) {
  IndexedParams out;
  out.params = params;
  out.lawmaker_of = data.lawmaker_index();
  out.bill_of = data.bill_index();
  if (params.x.size() != data.lawmakers.size() || params.a.size() != data.bills.size())
    throw DimensionError("parameters do not match the dataset");
  return out;
}

HeldoutStats heldout_loglik(const IndexedParams& fit, const std::vector<VoteRecord>& votes,
                            const MixtureMap& mixtures) {
  HeldoutStats s;
  double sum = 0;
  for (const auto& v : votes) {
    double logit;
    if (!heldout_logit(fit, v, mixtures, logit)) {
      ++s.n_excluded;
      continue;
    }
    sum += log_bernoulli(v.yea, logit);
    ++s.n_eval;
  }
  s.mean_ll = s.n_eval ? sum / double(s.n_eval) : 0.0;
  return s;
}

double accuracy(const IndexedParams& fit, const std::vector<VoteRecord>& votes,
                const MixtureMap& mixtures) {
  size_t correct = 0, n = 0;
  for (const auto& v : votes) {
    double logit;
    if (!heldout_logit(fit, v, mixtures, logit)) continue;
    ++n;
    if ((logit > 0 && v.yea) || (logit < 0 && !v.yea)) ++correct;
  }
  return n ? double(correct) / double(n) : 0.0;
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Classic: return "classic";
    case Variant::IssueLda: return "issue_lda";
    case Variant::IssueDirect: return "issue_direct";
    case Variant::IssuePermuted: return "issue_permuted";
    default: return "standard_lda";
  }
}

Variant parse_variant(const std::string& s) {
  if (s == "classic") return Variant::Classic;
  if (s == "issue_lda") return Variant::IssueLda;
  if (s == "issue_direct") return Variant::IssueDirect;
  if (s == "issue_permuted") return Variant::IssuePermuted;
  if (s == "standard_lda") return Variant::StandardLda;
  throw InvalidArgument("unknown variant '" + s + "'");
}

double CvReport::mean_ll(Variant v) const {
  double sum = 0;
  int n = 0;
  for (const auto& r : rows)
    if (r.variant == v) {
      sum += r.mean_ll;
      ++n;
    }
  return n ? sum / n : 0.0;
}

std::vector<IssueImprovement> issue_improvement(const std::vector<VoteRecord>& votes,
                                                const IndexedParams& issue,
                                                const IndexedParams& classic,
                                                const MixtureMap& mixtures,
                                                const std::vector<std::string>& labels) {
  int K = issue.params.K;
  auto names = issue_labels(labels, K);
  std::vector<double> num(K, 0.0), den(K, 0.0);
  for (const auto& v : votes) {
    double lj, li;
    if (!heldout_logit(issue, v, mixtures, lj)) continue;
    if (!heldout_logit(classic, v, mixtures, li)) continue;
    double gain = log_bernoulli(v.yea, lj) - log_bernoulli(v.yea, li);
    const auto& theta = mixtures.at(v.bill_id);
    for (int k = 0; k < K; ++k) {
      num[k] += theta[k] * gain;
      den[k] += theta[k];
    }
  }
  std::vector<IssueImprovement> out(K);
  for (int k = 0; k < K; ++k) {
    out[k].label = names[k];
    out[k].weight_sum = den[k];
    out[k].defined = den[k] > 0;
    out[k].imp = out[k].defined ? num[k] / den[k] : 0.0;
  }
  return out;
}

CvReport cross_validate(const RollCallDataset& data,
                        const std::map<Variant, std::vector<IssueMixture>>& mixtures_by_variant,
                        const Hyperparams& hp, const UpdateSchedule& schedule,
                        const CvOptions& options, const std::vector<std::string>& labels) {
  auto folds = split_folds(data, options.n_folds, options.seed);

  std::vector<std::vector<VoteRecord>> train(options.n_folds), held(options.n_folds);
  for (size_t i = 0; i < data.votes.size(); ++i)
    for (int f = 0; f < options.n_folds; ++f)
      (folds.fold_of_vote[i] == f ? held[f] : train[f]).push_back(data.votes[i]);

  // fold fits kept for the heldout-improvement aggregation
  std::vector<IndexedParams> classic_fits(options.n_folds), issue_fits(options.n_folds);
  bool have_classic = false;
  Variant issue_variant = Variant::Classic;
  if (mixtures_by_variant.count(Variant::IssueLda)) issue_variant = Variant::IssueLda;
  else if (mixtures_by_variant.count(Variant::IssueDirect)) issue_variant = Variant::IssueDirect;

  CvReport report;
  auto run_folds = [&](Variant variant, const std::vector<IssueMixture>& mixtures,
                       int permutation, uint64_t tag) {
    auto mix = mixture_map(mixtures);
    for (int f = 0; f < options.n_folds; ++f) {
      auto trainset = assemble_dataset(data.lawmakers, data.bills, train[f]);
      uint64_t fit_seed = derive_seed(options.seed, {21, tag, uint64_t(f)});
      auto result = fit(trainset, mixtures, hp, schedule, fit_seed, options.threads,
                        options.variances);
      auto indexed = index_params(result.state.means(), trainset);

      CvRow row;
      row.variant = variant;
      row.fold = f;
      row.permutation = permutation;
      auto stats = heldout_loglik(indexed, held[f], mix);
      row.mean_ll = stats.mean_ll;
      row.n_eval = stats.n_eval;
      row.n_excluded = stats.n_excluded;
      row.accuracy = accuracy(indexed, held[f], mix);
      row.converged = result.converged;
      report.rows.push_back(row);

      if (variant == Variant::Classic) classic_fits[f] = indexed;
      if (variant == issue_variant && permutation < 0) issue_fits[f] = indexed;
    }
  };

  for (const auto& [variant, mixtures] : mixtures_by_variant) {
    if (variant == Variant::Classic) {
      have_classic = true;
      run_folds(variant, {}, -1, uint64_t(variant));
    } else if (variant == Variant::IssuePermuted) {
      for (int r = 0; r < options.permutations; ++r) {
        auto permuted = permute_mixtures(mixtures, derive_seed(options.seed, {20, uint64_t(r)}));
        run_folds(variant, permuted, r, uint64_t(variant) * 1000 + uint64_t(r));
      }
    } else {
      run_folds(variant, mixtures, -1, uint64_t(variant));
    }
  }

  if (have_classic && issue_variant != Variant::Classic) {
    const auto& issue_mixtures = mixtures_by_variant.at(issue_variant);
    auto mix = mixture_map(issue_mixtures);
    int K = issue_fits[0].params.K;
    auto names = issue_labels(labels, K);
    std::vector<double> num(K, 0.0), den(K, 0.0);
    for (int f = 0; f < options.n_folds; ++f) {
      for (const auto& v : held[f]) {
        double lj, li;
        if (!heldout_logit(issue_fits[f], v, mix, lj)) continue;
        if (!heldout_logit(classic_fits[f], v, mix, li)) continue;
        double j = log_bernoulli(v.yea, lj), i = log_bernoulli(v.yea, li);
        const auto& theta = mix.at(v.bill_id);
        for (int k = 0; k < K; ++k) {
          num[k] += theta[k] * (j - i);
          den[k] += theta[k];
        }
        bool cl_ok = (li > 0 && v.yea) || (li < 0 && !v.yea);
        bool is_ok = (lj > 0 && v.yea) || (lj < 0 && !v.yea);
        if (!cl_ok && is_ok) ++report.votes_improved;
        if (cl_ok && !is_ok) ++report.votes_worsened;
      }
    }
    report.improvements.resize(K);
    for (int k = 0; k < K; ++k) {
      report.improvements[k].label = names[k];
      report.improvements[k].weight_sum = den[k];
      report.improvements[k].defined = den[k] > 0;
      report.improvements[k].imp = report.improvements[k].defined ? num[k] / den[k] : 0.0;
    }
  }
  return report;
}

CorrectedAdjustments corrected_adjustments(const ModelParams& params) {
  size_t U = params.x.size();
  if (U < 2) throw DegenerateError("need at least two lawmakers");
  double mn = *std::min_element(params.x.begin(), params.x.end());
  double mx = *std::max_element(params.x.begin(), params.x.end());
  if (mn == mx) throw DegenerateError("all ideal points equal");
  double sxx = 0;
  for (double v : params.x) sxx += v * v;
  if (sxx <= 0) throw DegenerateError("ideal points identically zero");

  CorrectedAdjustments out;
  out.beta.assign(params.K, 0.0);
  out.zhat.assign(U, std::vector<double>(params.K, 0.0));
  for (int k = 0; k < params.K; ++k) {
    double sxz = 0;
    for (size_t u = 0; u < U; ++u) sxz += params.x[u] * params.z[u][k];
    out.beta[k] = sxz / sxx;
    for (size_t u = 0; u < U; ++u)
      out.zhat[u][k] = params.z[u][k] - out.beta[k] * params.x[u];
  }
  return out;
}

SignificanceReport permutation_significance(const RollCallDataset& data,
                                            const std::vector<IssueMixture>& mixtures,
                                            const Hyperparams& hp,
                                            const UpdateSchedule& schedule, int R,
                                            uint64_t seed, int threads,
                                            const FixedVariances& variances) {
  if (R < 1) throw InvalidArgument("need at least one permutation replication");

  // slot R is the unpermuted fit; 0..R-1 are permuted refits
  std::vector<CorrectedAdjustments> corrected(R + 1);
  std::vector<bool> converged(R + 1, false);
  parallel_for(size_t(R) + 1, threads, [&](size_t r) {
    std::vector<IssueMixture> mix =
        r == size_t(R) ? mixtures
                       : permute_mixtures(mixtures, derive_seed(seed, {31, uint64_t(r)}));
    auto result = fit(data, mix, hp, schedule, derive_seed(seed, {30, uint64_t(r)}), 1,
                      variances);
    corrected[r] = corrected_adjustments(result.state.means());
    converged[r] = result.converged;
  });

  SignificanceReport rep;
  rep.corrected = corrected[R];
  rep.replications = R;
  rep.all_converged = std::all_of(converged.begin(), converged.end(), [](bool b) { return b; });
  size_t U = rep.corrected.zhat.size();
  int K = U ? int(rep.corrected.zhat[0].size()) : 0;
  rep.flagged.assign(U, std::vector<bool>(K, false));
  for (size_t u = 0; u < U; ++u)
    for (int k = 0; k < K; ++k) {
      bool extreme = true;
      for (int r = 0; r < R && extreme; ++r)
        if (std::fabs(rep.corrected.zhat[u][k]) <= std::fabs(corrected[r].zhat[u][k]))
          extreme = false;
      rep.flagged[u][k] = extreme;
    }
  return rep;
}

DiscriminantReport party_discriminant(const ModelParams& params,
                                      const std::vector<Lawmaker>& lawmakers) {
  if (lawmakers.size() != params.x.size())
    throw DimensionError("lawmaker list does not match parameters");
  int K = params.K;
  int P = K + 1;
  std::vector<int> idx;
  std::vector<double> y;
  for (size_t u = 0; u < lawmakers.size(); ++u) {
    if (lawmakers[u].party == Party::Democrat) {
      idx.push_back(int(u));
      y.push_back(-1.0);
    } else if (lawmakers[u].party == Party::Republican) {
      idx.push_back(int(u));
      y.push_back(1.0);
    }
  }
  bool has_d = std::count(y.begin(), y.end(), -1.0) > 0;
  bool has_r = std::count(y.begin(), y.end(), 1.0) > 0;
  if (!has_d || !has_r) throw InvalidArgument("discriminant needs both major parties");

  auto feature = [&](int u, int j) { return j == 0 ? params.x[u] : params.z[u][j - 1]; };

  Eigen::VectorXd mu_d = Eigen::VectorXd::Zero(P), mu_r = Eigen::VectorXd::Zero(P);
  int n_d = 0, n_r = 0;
  for (size_t i = 0; i < idx.size(); ++i) {
    for (int j = 0; j < P; ++j) {
      if (y[i] < 0) mu_d(j) += feature(idx[i], j);
      else mu_r(j) += feature(idx[i], j);
    }
    (y[i] < 0 ? n_d : n_r)++;
  }
  mu_d /= n_d;
  mu_r /= n_r;

  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(P, P);
  for (size_t i = 0; i < idx.size(); ++i) {
    Eigen::VectorXd w(P);
    for (int j = 0; j < P; ++j) w(j) = feature(idx[i], j);
    Eigen::VectorXd c = w - (y[i] < 0 ? mu_d : mu_r);
    sw += c * c.transpose();
  }

  Eigen::VectorXd diff = mu_r - mu_d;
  auto solve = [&](const Eigen::MatrixXd& m, Eigen::VectorXd& out) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) return false;
    out = lu.solve(diff);
    return out.allFinite();
  };
  Eigen::VectorXd w(P);
  if (!solve(sw, w)) {
    Eigen::MatrixXd reg = sw + 1e-8 * Eigen::MatrixXd::Identity(P, P);
    if (!solve(reg, w)) throw DegenerateError("singular within-class scatter");
  }

  std::vector<double> proj(idx.size()), xs(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) {
    double p = 0;
    for (int j = 0; j < P; ++j) p += w(j) * feature(idx[i], j);
    proj[i] = p;
    xs[i] = params.x[idx[i]];
  }
  auto sd_of = [](const std::vector<double>& v) {
    double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double s = 0;
    for (double t : v) s += (t - m) * (t - m);
    return std::sqrt(s / v.size());
  };
  double sd_x = sd_of(xs), sd_p = sd_of(proj);
  if (sd_p <= 0 || sd_x <= 0) throw DegenerateError("degenerate discriminant projection");
  double scale = sd_x / sd_p;
  for (double& p : proj) p *= scale;

  DiscriminantReport rep;
  rep.weights.resize(P);
  for (int j = 0; j < P; ++j) rep.weights[j] = w(j) * scale;
  rep.projection_corr = pearson(proj, y);
  rep.x_corr = pearson(xs, y);
  return rep;
}

BaselineStats random_adjustment_baseline(const ModelParams& params,
                                         const std::vector<Lawmaker>& lawmakers, int trials,
                                         uint64_t seed) {
  if (trials < 2) throw InvalidArgument("need at least two trials");
  size_t U = params.x.size();
  int K = params.K;
  double mean_z = 0, var_z = 0;
  size_t n = U * size_t(K);
  if (n > 0) {
    for (const auto& row : params.z)
      for (double v : row) mean_z += v;
    mean_z /= double(n);
    for (const auto& row : params.z)
      for (double v : row) var_z += (v - mean_z) * (v - mean_z);
    var_z /= double(n);
  }
  double sd_z = std::sqrt(var_z);

  std::vector<double> corrs(trials);
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {40, uint64_t(t)}));
    ModelParams p = params;
    for (size_t u = 0; u < U; ++u)
      for (int k = 0; k < K; ++k) p.z[u][k] = sd_z * rng.normal();
    corrs[t] = party_discriminant(p, lawmakers).projection_corr;
  }
  BaselineStats out;
  out.trials = trials;
  out.mean = std::accumulate(corrs.begin(), corrs.end(), 0.0) / trials;
  double s = 0;
  for (double c : corrs) s += (c - out.mean) * (c - out.mean);
  out.sd = std::sqrt(s / (trials - 1));
  return out;
}

}  // namespace rollcall
