#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "rollcall/corpus.hpp"
#include "rollcall/model.hpp"

namespace rollcall {

struct VariationalState {
  std::vector<double> mean_x;
  std::vector<std::vector<double>> mean_z;  // lawmakers x K
  std::vector<double> mean_a;
  std::vector<double> mean_b;
  double var_x = std::exp(-5.0);
  double var_z = std::exp(-5.0);
  double var_a = std::exp(-5.0);
  double var_b = std::exp(-5.0);
  int K = 0;

  ModelParams means() const;
};

struct FixedVariances {
  double var_x = std::exp(-5.0);
  double var_z = std::exp(-5.0);
  double var_a = std::exp(-5.0);
  double var_b = std::exp(-5.0);
};

struct TargetRef {
  enum Kind { X, Z, A, B } kind = X;
  int index = 0;  // lawmaker index for X/Z, bill index for A/B
};

// Joint samples over one update's Markov blanket. For lawmaker targets the
// blanket is (x_u, z_u row, a_d and b_d of every bill u voted on); for bill
// targets it is (a_d, b_d, x_u and z_u row of every voter). Arrays are
// parallel to `lawmakers`/`bills`; each holds M values.
struct SampleBatch {
  TargetRef target;
  int M = 0;
  bool qmc = true;
  std::vector<int> lawmakers;
  std::vector<int> bills;
  std::vector<std::vector<double>> x;               // per lawmaker
  std::vector<std::vector<std::vector<double>>> z;  // per lawmaker, K rows of M
  std::vector<std::vector<double>> a;               // per bill
  std::vector<std::vector<double>> b;
};

struct UpdateSchedule {
  int m_init = 21;
  double m_growth = 1.2;
  int m_max = 500;
  double ema_decay = 0.8;
  double ema_threshold = 1.0;
  double step_cap = 0.1;
  int max_sweeps = 150;
};

struct FitResult {
  VariationalState state;
  std::vector<double> elbo_trace;  // one estimate per sweep
  int sweeps = 0;
  bool identified = false;
  bool converged = false;
  long long skipped_updates = 0;
  int final_m = 0;
};

// Checkpoints capture everything a resumed fit needs to reproduce the
// uninterrupted run exactly; per-sweep RNG streams are derived from
// (seed, sweep, block), so no generator state is stored.
struct FitCheckpoint {
  VariationalState state;
  int sweeps_done = 0;
  int m = 0;
  double ema = NAN;
  double prev_elbo = NAN;
  std::vector<double> elbo_trace;
  long long skipped_updates = 0;
};

// Equally spaced inverse-CDF points, seeded-shuffled.
std::vector<double> qmc_marginal_samples(double mean, double var, int M, uint64_t seed);

SampleBatch blanket_samples(const VariationalState& state, TargetRef target,
                            const RollCallDataset& data, int M, uint64_t seed,
                            bool qmc = true);

// (d/dmean log q, d^2/dmean^2 log q) for a Gaussian marginal
inline std::pair<double, double> score_gradient_terms(double sample, double mean, double var) {
  return {(sample - mean) / var, -1.0 / var};
}

// Batch-mean reward baseline for one scalar coordinate of the target
// (z_coord selects the row coordinate for Z targets, ignored otherwise).
double control_constant(const VariationalState& state, const SampleBatch& batch,
                        const RollCallDataset& data, const std::vector<IssueMixture>& mixtures,
                        const Hyperparams& hp, int z_coord = 0);

struct TaylorCoefficients {
  std::vector<double> gradient;
  std::vector<std::vector<double>> hessian;  // diagonal for Z row targets
  std::vector<double> control;
};

TaylorCoefficients mc_taylor_coefficients(const VariationalState& state,
                                          const SampleBatch& batch,
                                          const RollCallDataset& data,
                                          const std::vector<IssueMixture>& mixtures,
                                          const Hyperparams& hp);

// Applies the clamped ascent step per coordinate; coordinates whose estimated
// curvature is not negative are skipped. Returns the number of skips.
int newton_update(VariationalState& state, TargetRef target, const TaylorCoefficients& coef,
                  const UpdateSchedule& schedule);

double estimate_elbo(const VariationalState& state, const RollCallDataset& data,
                     const std::vector<IssueMixture>& mixtures, const Hyperparams& hp, int M,
                     uint64_t seed);

// Returns true if the sign flip was applied. Throws IdentificationError
// when either major party is absent.
bool identify_signs(VariationalState& state, const std::vector<Lawmaker>& lawmakers);
bool identify_signs(ModelParams& params, const std::vector<Lawmaker>& lawmakers);

using SweepCallback = std::function<void(const FitCheckpoint&)>;

// Empty mixtures select the classical model (K = 0).
FitResult fit(const RollCallDataset& data, const std::vector<IssueMixture>& mixtures,
              const Hyperparams& hp, const UpdateSchedule& schedule, uint64_t seed,
              int threads = 1, const FixedVariances& variances = {},
              const FitCheckpoint* resume = nullptr, const SweepCallback& on_sweep = nullptr);

}  // namespace rollcall
