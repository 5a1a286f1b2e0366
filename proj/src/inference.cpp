#include "rollcall/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "rollcall/errors.hpp"
#include "rollcall/par.hpp"
#include "rollcall/rng.hpp"

namespace rollcall {

namespace {

// Sub-stream tags; shared by block updates and the ELBO estimator so one
// batch seed fully determines every variable's draw.
constexpr uint64_t kTagX = 10, kTagZ = 11, kTagA = 12, kTagB = 13;

struct DataView {
  int U = 0, D = 0, K = 0;
  std::vector<std::vector<std::pair<int, bool>>> by_lawmaker;  // u -> (d, yea)
  std::vector<std::vector<std::pair<int, bool>>> by_bill;      // d -> (u, yea)
  std::vector<std::vector<double>> theta;                      // D x K

  DataView(const RollCallDataset& data, const std::vector<IssueMixture>& mixtures) {
    U = int(data.lawmakers.size());
    D = int(data.bills.size());
    by_lawmaker.resize(U);
    by_bill.resize(D);
    auto lm_of = data.lawmaker_index();
    auto bill_of = data.bill_index();
    for (const auto& v : data.votes) {
      int u = lm_of.at(v.lawmaker_id);
      int d = bill_of.at(v.bill_id);
      by_lawmaker[u].push_back({d, v.yea});
      by_bill[d].push_back({u, v.yea});
    }
    if (!mixtures.empty()) {
      auto mix = mixture_map(mixtures);
      K = int(mix.begin()->second.size());
      theta.resize(D);
      for (int d = 0; d < D; ++d) {
        if (by_bill[d].empty()) continue;
        auto it = mix.find(data.bills[d].id);
        if (it == mix.end())
          throw DimensionError("no mixture for voted-on bill '" + data.bills[d].id + "'");
        if (int(it->second.size()) != K)
          throw DimensionError("mixture length mismatch for bill '" + data.bills[d].id + "'");
        theta[d] = it->second;
      }
      for (int d = 0; d < D; ++d)
        if (theta[d].empty()) theta[d].assign(K, 0.0);
    }
  }
};

std::vector<double> qmc_grid(int M) {
  boost::math::normal_distribution<double> nd;
  std::vector<double> g(M);
  for (int i = 0; i < M; ++i) g[i] = boost::math::quantile(nd, (i + 0.5) / M);
  return g;
}

void fill_marginal(double mean, double var, int M, uint64_t seed, bool qmc,
                   std::vector<double>& out) {
  out.resize(M);
  Rng rng(seed);
  double sd = std::sqrt(var);
  if (qmc) {
    auto g = qmc_grid(M);
    for (int i = 0; i < M; ++i) out[i] = mean + sd * g[i];
    rng.shuffle(out);
  } else {
    for (int i = 0; i < M; ++i) out[i] = mean + sd * rng.normal();
  }
}

const std::vector<double> kNoTheta;

// Sum of vote log-likelihoods per joint sample, over the batch's blanket.
// Batch arrays are parallel to the adjacency lists they were built from.
std::vector<double> batch_loglik(const SampleBatch& batch, const DataView& view) {
  std::vector<double> ll(batch.M, 0.0);
  int K = view.K;
  bool lawmaker_target = batch.target.kind == TargetRef::X || batch.target.kind == TargetRef::Z;
  if (lawmaker_target) {
    int u = batch.target.index;
    const auto& adj = view.by_lawmaker[u];
    if (adj.size() != batch.bills.size())
      throw DimensionError("sample batch does not match the vote graph");
    const auto& xs = batch.x[0];
    for (size_t i = 0; i < batch.bills.size(); ++i) {
      int d = batch.bills[i];
      if (adj[i].first != d) throw DimensionError("sample batch bill order mismatch");
      bool yea = adj[i].second;
      const auto& th = view.theta.empty() ? kNoTheta : view.theta[d];
      const auto& as = batch.a[i];
      const auto& bs = batch.b[i];
      for (int m = 0; m < batch.M; ++m) {
        double pos = xs[m];
        for (int k = 0; k < K; ++k) pos += batch.z[0][k][m] * th[k];
        double t = pos * as[m] + bs[m];
        ll[m] += (yea ? t : 0.0) - log1pexp(t);
      }
    }
  } else {
    int d = batch.bills[0];
    const auto& adj = view.by_bill[d];
    if (adj.size() != batch.lawmakers.size())
      throw DimensionError("sample batch does not match the vote graph");
    const auto& th = view.theta.empty() ? kNoTheta : view.theta[d];
    const auto& as = batch.a[0];
    const auto& bs = batch.b[0];
    for (size_t i = 0; i < batch.lawmakers.size(); ++i) {
      if (adj[i].first != batch.lawmakers[i])
        throw DimensionError("sample batch lawmaker order mismatch");
      bool yea = adj[i].second;
      const auto& xs = batch.x[i];
      for (int m = 0; m < batch.M; ++m) {
        double pos = xs[m];
        for (int k = 0; k < K; ++k) pos += batch.z[i][k][m] * th[k];
        double t = pos * as[m] + bs[m];
        ll[m] += (yea ? t : 0.0) - log1pexp(t);
      }
    }
  }
  return ll;
}

// log-prior minus log q of the target coordinate, added onto the vote terms
void add_target_terms(std::vector<double>& f, const SampleBatch& batch,
                      const VariationalState& state, const Hyperparams& hp, int z_coord) {
  switch (batch.target.kind) {
    case TargetRef::X: {
      double mu = state.mean_x[batch.target.index];
      for (int m = 0; m < batch.M; ++m) {
        double s = batch.x[0][m];
        f[m] += log_gaussian(s, 0.0, hp.prior_var_x) - log_gaussian(s, mu, state.var_x);
      }
      break;
    }
    case TargetRef::Z: {
      double mu = state.mean_z[batch.target.index][z_coord];
      for (int m = 0; m < batch.M; ++m) {
        double s = batch.z[0][z_coord][m];
        f[m] += log_laplace(s, hp.lambda1) - log_gaussian(s, mu, state.var_z);
      }
      break;
    }
    case TargetRef::A: {
      double mu = state.mean_a[batch.target.index];
      for (int m = 0; m < batch.M; ++m) {
        double s = batch.a[0][m];
        f[m] += log_gaussian(s, 0.0, hp.prior_var_a) - log_gaussian(s, mu, state.var_a);
      }
      break;
    }
    case TargetRef::B: {
      double mu = state.mean_b[batch.target.index];
      for (int m = 0; m < batch.M; ++m) {
        double s = batch.b[0][m];
        f[m] += log_gaussian(s, 0.0, hp.prior_var_b) - log_gaussian(s, mu, state.var_b);
      }
      break;
    }
  }
}

const std::vector<double>& target_samples(const SampleBatch& batch, int z_coord) {
  switch (batch.target.kind) {
    case TargetRef::X: return batch.x[0];
    case TargetRef::Z: return batch.z[0][z_coord];
    case TargetRef::A: return batch.a[0];
    default: return batch.b[0];
  }
}

double target_mean(const SampleBatch& batch, const VariationalState& state, int z_coord) {
  switch (batch.target.kind) {
    case TargetRef::X: return state.mean_x[batch.target.index];
    case TargetRef::Z: return state.mean_z[batch.target.index][z_coord];
    case TargetRef::A: return state.mean_a[batch.target.index];
    default: return state.mean_b[batch.target.index];
  }
}

double target_var(const SampleBatch& batch, const VariationalState& state) {
  switch (batch.target.kind) {
    case TargetRef::X: return state.var_x;
    case TargetRef::Z: return state.var_z;
    case TargetRef::A: return state.var_a;
    default: return state.var_b;
  }
}

SampleBatch build_batch(const VariationalState& state, TargetRef target, const DataView& view,
                        int M, uint64_t seed, bool qmc) {
  if (M < 1) throw InvalidArgument("sample count must be at least 1");
  SampleBatch batch;
  batch.target = target;
  batch.M = M;
  batch.qmc = qmc;
  int K = state.K;

  auto draw_lawmaker = [&](int u, size_t slot) {
    fill_marginal(state.mean_x[u], state.var_x, M, derive_seed(seed, {kTagX, uint64_t(u)}),
                  qmc, batch.x[slot]);
    batch.z[slot].resize(K);
    for (int k = 0; k < K; ++k)
      fill_marginal(state.mean_z[u][k], state.var_z, M,
                    derive_seed(seed, {kTagZ, uint64_t(u), uint64_t(k)}), qmc,
                    batch.z[slot][k]);
  };
  auto draw_bill = [&](int d, size_t slot) {
    fill_marginal(state.mean_a[d], state.var_a, M, derive_seed(seed, {kTagA, uint64_t(d)}),
                  qmc, batch.a[slot]);
    fill_marginal(state.mean_b[d], state.var_b, M, derive_seed(seed, {kTagB, uint64_t(d)}),
                  qmc, batch.b[slot]);
  };

  if (target.kind == TargetRef::X || target.kind == TargetRef::Z) {
    int u = target.index;
    batch.lawmakers = {u};
    batch.x.resize(1);
    batch.z.resize(1);
    draw_lawmaker(u, 0);
    batch.bills.reserve(view.by_lawmaker[u].size());
    for (const auto& dv : view.by_lawmaker[u]) batch.bills.push_back(dv.first);
    batch.a.resize(batch.bills.size());
    batch.b.resize(batch.bills.size());
    for (size_t i = 0; i < batch.bills.size(); ++i) draw_bill(batch.bills[i], i);
  } else {
    int d = target.index;
    batch.bills = {d};
    batch.a.resize(1);
    batch.b.resize(1);
    draw_bill(d, 0);
    batch.lawmakers.reserve(view.by_bill[d].size());
    for (const auto& uv : view.by_bill[d]) batch.lawmakers.push_back(uv.first);
    batch.x.resize(batch.lawmakers.size());
    batch.z.resize(batch.lawmakers.size());
    for (size_t i = 0; i < batch.lawmakers.size(); ++i) draw_lawmaker(batch.lawmakers[i], i);
  }
  return batch;
}

TaylorCoefficients taylor_from_batch(const VariationalState& state, const SampleBatch& batch,
                                     const DataView& view, const Hyperparams& hp) {
  int coords = batch.target.kind == TargetRef::Z ? state.K : 1;
  auto ll = batch_loglik(batch, view);
  TaylorCoefficients out;
  out.gradient.assign(coords, 0.0);
  out.control.assign(coords, 0.0);
  out.hessian.assign(coords, std::vector<double>(coords, 0.0));
  double var = target_var(batch, state);
  for (int c = 0; c < coords; ++c) {
    std::vector<double> f = ll;
    add_target_terms(f, batch, state, hp, c);
    double C = std::accumulate(f.begin(), f.end(), 0.0) / batch.M;
    const auto& samples = target_samples(batch, c);
    double mu = target_mean(batch, state, c);
    double g = 0, h = 0;
    for (int m = 0; m < batch.M; ++m) {
      double s = (samples[m] - mu) / var;
      double r = f[m] - C;
      g += s * r;
      h += s * s * (r - 1.0);
    }
    out.gradient[c] = g / batch.M;
    out.hessian[c][c] = h / batch.M;
    out.control[c] = C;
  }
  return out;
}

double estimate_elbo_view(const VariationalState& state, const DataView& view,
                          const Hyperparams& hp, int M, uint64_t seed) {
  if (M < 1) throw InvalidArgument("sample count must be at least 1");
  int U = view.U, D = view.D, K = state.K;
  std::vector<std::vector<double>> xs(U), as(D), bs(D);
  std::vector<std::vector<std::vector<double>>> zs(U);
  for (int u = 0; u < U; ++u) {
    fill_marginal(state.mean_x[u], state.var_x, M, derive_seed(seed, {kTagX, uint64_t(u)}),
                  true, xs[u]);
    zs[u].resize(K);
    for (int k = 0; k < K; ++k)
      fill_marginal(state.mean_z[u][k], state.var_z, M,
                    derive_seed(seed, {kTagZ, uint64_t(u), uint64_t(k)}), true, zs[u][k]);
  }
  for (int d = 0; d < D; ++d) {
    fill_marginal(state.mean_a[d], state.var_a, M, derive_seed(seed, {kTagA, uint64_t(d)}),
                  true, as[d]);
    fill_marginal(state.mean_b[d], state.var_b, M, derive_seed(seed, {kTagB, uint64_t(d)}),
                  true, bs[d]);
  }

  std::vector<double> f(M, 0.0);
  for (int u = 0; u < U; ++u) {
    for (const auto& [d, yea] : view.by_lawmaker[u]) {
      const auto& th = view.theta.empty() ? kNoTheta : view.theta[d];
      for (int m = 0; m < M; ++m) {
        double pos = xs[u][m];
        for (int k = 0; k < K; ++k) pos += zs[u][k][m] * th[k];
        double t = pos * as[d][m] + bs[d][m];
        f[m] += (yea ? t : 0.0) - log1pexp(t);
      }
    }
  }
  for (int u = 0; u < U; ++u) {
    for (int m = 0; m < M; ++m)
      f[m] += log_gaussian(xs[u][m], 0.0, hp.prior_var_x) -
              log_gaussian(xs[u][m], state.mean_x[u], state.var_x);
    for (int k = 0; k < K; ++k)
      for (int m = 0; m < M; ++m)
        f[m] += log_laplace(zs[u][k][m], hp.lambda1) -
                log_gaussian(zs[u][k][m], state.mean_z[u][k], state.var_z);
  }
  for (int d = 0; d < D; ++d)
    for (int m = 0; m < M; ++m) {
      f[m] += log_gaussian(as[d][m], 0.0, hp.prior_var_a) -
              log_gaussian(as[d][m], state.mean_a[d], state.var_a);
      f[m] += log_gaussian(bs[d][m], 0.0, hp.prior_var_b) -
              log_gaussian(bs[d][m], state.mean_b[d], state.var_b);
    }
  return std::accumulate(f.begin(), f.end(), 0.0) / M;
}

std::vector<int> id_order(const std::vector<Lawmaker>& lm) {
  std::vector<int> order(lm.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return lm[i].id < lm[j].id; });
  return order;
}

std::vector<int> id_order(const std::vector<BillDoc>& bills) {
  std::vector<int> order(bills.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return bills[i].id < bills[j].id; });
  return order;
}

}  // namespace

ModelParams VariationalState::means() const {
  ModelParams p;
  p.x = mean_x;
  p.z = mean_z;
  p.a = mean_a;
  p.b = mean_b;
  p.K = K;
  return p;
}

std::vector<double> qmc_marginal_samples(double mean, double var, int M, uint64_t seed) {
  if (M < 1) throw InvalidArgument("sample count must be at least 1");
  std::vector<double> out;
  fill_marginal(mean, var, M, seed, true, out);
  return out;
}

SampleBatch blanket_samples(const VariationalState& state, TargetRef target,
                            const RollCallDataset& data, int M, uint64_t seed, bool qmc) {
  DataView view(data, {});
  return build_batch(state, target, view, M, seed, qmc);
}

double control_constant(const VariationalState& state, const SampleBatch& batch,
                        const RollCallDataset& data, const std::vector<IssueMixture>& mixtures,
                        const Hyperparams& hp, int z_coord) {
  DataView view(data, mixtures);
  auto f = batch_loglik(batch, view);
  add_target_terms(f, batch, state, hp, z_coord);
  return std::accumulate(f.begin(), f.end(), 0.0) / batch.M;
}

TaylorCoefficients mc_taylor_coefficients(const VariationalState& state,
                                          const SampleBatch& batch,
                                          const RollCallDataset& data,
                                          const std::vector<IssueMixture>& mixtures,
                                          const Hyperparams& hp) {
  DataView view(data, mixtures);
  return taylor_from_batch(state, batch, view, hp);
}

int newton_update(VariationalState& state, TargetRef target, const TaylorCoefficients& coef,
                  const UpdateSchedule& schedule) {
  int coords = target.kind == TargetRef::Z ? state.K : 1;
  int skips = 0;
  std::vector<double> step(coords, 0.0);
  std::vector<bool> apply(coords, false);
  for (int c = 0; c < coords; ++c) {
    double neg_h = -coef.hessian[c][c];
    if (neg_h > 1e-12) {
      step[c] = std::clamp(coef.gradient[c] / neg_h, -schedule.step_cap, schedule.step_cap);
      apply[c] = true;
    } else {
      ++skips;
    }
  }
  for (int c = 0; c < coords; ++c) {
    if (!apply[c]) continue;
    switch (target.kind) {
      case TargetRef::X: state.mean_x[target.index] += step[c]; break;
      case TargetRef::Z: state.mean_z[target.index][c] += step[c]; break;
      case TargetRef::A: state.mean_a[target.index] += step[c]; break;
      case TargetRef::B: state.mean_b[target.index] += step[c]; break;
    }
  }
  return skips;
}

double estimate_elbo(const VariationalState& state, const RollCallDataset& data,
                     const std::vector<IssueMixture>& mixtures, const Hyperparams& hp, int M,
                     uint64_t seed) {
  DataView view(data, mixtures);
  if (view.K != state.K) throw DimensionError("state K does not match mixtures");
  return estimate_elbo_view(state, view, hp, M, seed);
}

namespace {

bool identify_core(std::vector<double>& x, std::vector<std::vector<double>>& z,
                   std::vector<double>& a, const std::vector<Lawmaker>& lawmakers) {
  double sum_d = 0, sum_r = 0;
  int n_d = 0, n_r = 0;
  for (size_t u = 0; u < lawmakers.size(); ++u) {
    if (lawmakers[u].party == Party::Democrat) {
      sum_d += x[u];
      ++n_d;
    } else if (lawmakers[u].party == Party::Republican) {
      sum_r += x[u];
      ++n_r;
    }
  }
  if (n_d == 0 || n_r == 0)
    throw IdentificationError("sign identification needs both major parties");
  if (sum_r / n_r >= sum_d / n_d) return false;
  for (double& v : x) v = -v;
  for (auto& row : z)
    for (double& v : row) v = -v;
  for (double& v : a) v = -v;
  return true;
}

}  // namespace

bool identify_signs(VariationalState& state, const std::vector<Lawmaker>& lawmakers) {
  return identify_core(state.mean_x, state.mean_z, state.mean_a, lawmakers);
}

bool identify_signs(ModelParams& params, const std::vector<Lawmaker>& lawmakers) {
  return identify_core(params.x, params.z, params.a, lawmakers);
}

FitResult fit(const RollCallDataset& data, const std::vector<IssueMixture>& mixtures,
              const Hyperparams& hp, const UpdateSchedule& schedule, uint64_t seed,
              int threads, const FixedVariances& variances, const FitCheckpoint* resume,
              const SweepCallback& on_sweep) {
  if (schedule.m_init < 1 || schedule.m_init > schedule.m_max)
    throw InvalidArgument("m_init must lie in [1, m_max]");
  if (schedule.ema_decay <= 0 || schedule.ema_decay >= 1)
    throw InvalidArgument("ema_decay must lie in (0,1)");
  if (schedule.m_growth <= 0 || schedule.step_cap <= 0 || schedule.max_sweeps < 1)
    throw InvalidArgument("invalid schedule");

  DataView view(data, mixtures);
  int U = view.U, D = view.D, K = view.K;

  VariationalState state;
  state.K = K;
  state.mean_x.assign(U, 0.0);
  state.mean_z.assign(U, std::vector<double>(K, 0.0));
  state.mean_a.assign(D, 0.0);
  state.mean_b.assign(D, 0.0);
  state.var_x = variances.var_x;
  state.var_z = variances.var_z;
  state.var_a = variances.var_a;
  state.var_b = variances.var_b;

  int start_sweep = 0;
  int M = schedule.m_init;
  double ema = NAN, prev_elbo = NAN;
  std::vector<double> trace;
  long long skips = 0;
  if (resume) {
    if (int(resume->state.mean_x.size()) != U || resume->state.K != K)
      throw DimensionError("checkpoint does not match the dataset");
    state = resume->state;
    start_sweep = resume->sweeps_done;
    M = resume->m;
    ema = resume->ema;
    prev_elbo = resume->prev_elbo;
    trace = resume->elbo_trace;
    skips = resume->skipped_updates;
  }

  auto lm_order = id_order(data.lawmakers);
  auto bill_order = id_order(data.bills);
  uint64_t elbo_seed = derive_seed(seed, {2});

  FitResult result;
  for (int sweep = start_sweep; sweep < schedule.max_sweeps; ++sweep) {
    std::vector<long long> task_skips(std::max(U, D), 0);

    parallel_for(lm_order.size(), threads, [&](size_t i) {
      int u = lm_order[i];
      if (view.by_lawmaker[u].empty()) return;
      {
        uint64_t bs = derive_seed(seed, {1, uint64_t(sweep), uint64_t(2 * u)});
        auto batch = build_batch(state, {TargetRef::X, u}, view, M, bs, true);
        auto coef = taylor_from_batch(state, batch, view, hp);
        task_skips[i] += newton_update(state, {TargetRef::X, u}, coef, schedule);
      }
      if (K > 0) {
        uint64_t bs = derive_seed(seed, {1, uint64_t(sweep), uint64_t(2 * u + 1)});
        auto batch = build_batch(state, {TargetRef::Z, u}, view, M, bs, true);
        auto coef = taylor_from_batch(state, batch, view, hp);
        task_skips[i] += newton_update(state, {TargetRef::Z, u}, coef, schedule);
      }
    });
    for (int i = 0; i < U; ++i) skips += task_skips[i];
    std::fill(task_skips.begin(), task_skips.end(), 0);

    parallel_for(bill_order.size(), threads, [&](size_t i) {
      int d = bill_order[i];
      if (view.by_bill[d].empty()) return;
      {
        uint64_t bs = derive_seed(seed, {1, uint64_t(sweep), uint64_t(2 * U + 2 * d)});
        auto batch = build_batch(state, {TargetRef::A, d}, view, M, bs, true);
        auto coef = taylor_from_batch(state, batch, view, hp);
        task_skips[i] += newton_update(state, {TargetRef::A, d}, coef, schedule);
      }
      {
        uint64_t bs = derive_seed(seed, {1, uint64_t(sweep), uint64_t(2 * U + 2 * d + 1)});
        auto batch = build_batch(state, {TargetRef::B, d}, view, M, bs, true);
        auto coef = taylor_from_batch(state, batch, view, hp);
        task_skips[i] += newton_update(state, {TargetRef::B, d}, coef, schedule);
      }
    });
    for (int i = 0; i < D; ++i) skips += task_skips[i];

    double elbo = estimate_elbo_view(state, view, hp, M, elbo_seed);
    trace.push_back(elbo);

    bool done = false;
    if (!std::isnan(prev_elbo)) {
      double d_obs = std::fabs(elbo - prev_elbo);
      ema = std::isnan(ema) ? d_obs
                            : schedule.ema_decay * ema + (1.0 - schedule.ema_decay) * d_obs;
      if (ema < schedule.ema_threshold) {
        if (M >= schedule.m_max) {
          done = true;
        } else {
          M = std::min(int(std::ceil(M * schedule.m_growth)), schedule.m_max);
        }
      }
    }
    prev_elbo = elbo;

    if (on_sweep) {
      FitCheckpoint cp;
      cp.state = state;
      cp.sweeps_done = sweep + 1;
      cp.m = M;
      cp.ema = ema;
      cp.prev_elbo = prev_elbo;
      cp.elbo_trace = trace;
      cp.skipped_updates = skips;
      on_sweep(cp);
    }
    if (done) {
      result.converged = true;
      break;
    }
  }

  result.state = std::move(state);
  result.elbo_trace = std::move(trace);
  result.sweeps = int(result.elbo_trace.size());
  result.skipped_updates = skips;
  result.final_m = M;
  try {
    identify_signs(result.state, data.lawmakers);
    result.identified = true;
  } catch (const IdentificationError&) {
    result.identified = false;
  }
  return result;
}

}  // namespace rollcall
