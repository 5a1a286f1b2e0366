#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rollcall/model.hpp"
#include "rollcall/rng.hpp"
#include "util.hpp"

using namespace rollcall;

namespace {

ModelParams zero_params(int U, int D, int K) {
  ModelParams p;
  p.K = K;
  p.x.assign(U, 0.0);
  if (K > 0) p.z.assign(U, std::vector<double>(K, 0.0));
  p.a.assign(D, 0.0);
  p.b.assign(D, 0.0);
  return p;
}

}  // namespace

TEST_CASE("logistic function") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(2.0) == doctest::Approx(0.8807971).epsilon(1e-7));
  for (double s : {-7.3, -1.0, 0.25, 3.9, 40.0})
    CHECK(logistic(s) + logistic(-s) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(logistic(800.0) == 1.0);
  CHECK(logistic(-800.0) == 0.0);
  CHECK(std::isfinite(log1pexp(800.0)));
  CHECK(log_bernoulli(true, 0.0) == doctest::Approx(std::log(0.5)));
  CHECK(log_bernoulli(false, 0.0) == doctest::Approx(std::log(0.5)));
  CHECK(log_bernoulli(true, 3.0) == doctest::Approx(std::log(logistic(3.0))));
  CHECK(log_bernoulli(false, 3.0) == doctest::Approx(std::log(logistic(-3.0))));
}

TEST_CASE("vote probability") {
  SUBCASE("all zeros is a coin flip") {
    auto p = zero_params(1, 1, 1);
    std::vector<double> theta = {1.0};
    CHECK(vote_probability(0, 0, p, &theta) == 0.5);
  }
  SUBCASE("zero adjustments reduce to the classical model for any mixture") {
    auto issue = zero_params(2, 2, 3);
    issue.x = {0.7, -1.1};
    issue.a = {1.3, -0.5};
    issue.b = {0.2, 0.9};
    auto classic = issue;
    classic.K = 0;
    classic.z.clear();
    for (auto theta : {std::vector<double>{1, 0, 0}, std::vector<double>{0.2, 0.5, 0.3}})
      for (int u = 0; u < 2; ++u)
        for (int d = 0; d < 2; ++d)
          CHECK(vote_probability(u, d, issue, &theta) ==
                vote_probability(u, d, classic, nullptr));
  }
  SUBCASE("worked example") {
    auto p = zero_params(1, 1, 2);
    p.x = {1.0};
    p.z = {{0.5, 0.5}};
    p.a = {2.0};
    p.b = {-1.0};
    std::vector<double> theta = {0.5, 0.5};  // z'theta = 0.5
    CHECK(vote_probability(0, 0, p, &theta) == doctest::Approx(0.8807971).epsilon(1e-7));
  }
  SUBCASE("mixture dimension is checked") {
    auto p = zero_params(1, 1, 2);
    std::vector<double> theta = {1.0};
    CHECK_THROWS_AS(vote_probability(0, 0, p, &theta), DimensionError);
  }
}

TEST_CASE("effective ideal point") {
  auto p = zero_params(1, 1, 3);
  p.x = {0.4};
  p.z = {{0.3, -0.9, 0.6}};
  CHECK(effective_ideal_point(0, p, {0, 1, 0}) == doctest::Approx(0.4 - 0.9));
  CHECK(effective_ideal_point(0, p, {1.0 / 3, 1.0 / 3, 1.0 / 3}) ==
        doctest::Approx(0.4 + (0.3 - 0.9 + 0.6) / 3.0));
  p.z = {{0.0, 0.0, 0.0}};
  CHECK(effective_ideal_point(0, p, {0.2, 0.5, 0.3}) == doctest::Approx(0.4));
}

TEST_CASE("cut point") {
  auto p = zero_params(1, 2, 0);
  p.a = {2.0, 0.0};
  p.b = {-1.0, 1.0};
  CHECK(cut_point(0, p) == doctest::Approx(0.5));
  CHECK_THROWS_AS(cut_point(1, p), DegenerateError);
}

TEST_CASE("mixture map rejects duplicates") {
  CHECK_THROWS_AS(mixture_map({{"B0", {1.0}}, {"B0", {1.0}}}), IntegrityError);
}

TEST_CASE("log joint at the origin") {
  auto data = testutil::grid_dataset(1, 1);
  auto p = zero_params(1, 1, 1);
  Hyperparams hp;
  std::vector<IssueMixture> mixtures = {{"B0", {1.0}}};
  double expected = std::log(0.5)                        // one vote at logit 0
                    + 3.0 * (-0.5 * std::log(2 * M_PI))  // x, a, b at their prior modes
                    + std::log(0.5);                     // Laplace(1) density at 0
  CHECK(log_joint(p, data, mixtures, hp) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("doubling lambda shifts only the adjustment prior") {
  Hyperparams hp;
  auto truth = sample_synthetic(4, 6, 3, hp, MixtureSource::Dirichlet, 1.0, 11);
  double sum_abs_z = 0;
  for (const auto& zu : truth.params.z)
    for (double zk : zu) sum_abs_z += std::fabs(zk);
  Hyperparams doubled = hp;
  doubled.lambda1 = 2.0 * hp.lambda1;
  double delta = log_joint(truth.params, truth.dataset, truth.mixtures, doubled) -
                 log_joint(truth.params, truth.dataset, truth.mixtures, hp);
  CHECK(delta == doctest::Approx(4 * 3 * std::log(2.0) - hp.lambda1 * sum_abs_z)
                     .epsilon(1e-12));
}

TEST_CASE("log joint matches a symbolic evaluation on a 1x1 model") {
  auto data = testutil::grid_dataset(1, 1);
  REQUIRE(data.votes[0].yea);
  ModelParams p = zero_params(1, 1, 1);
  p.x = {0.3};
  p.z = {{-0.2}};
  p.a = {1.1};
  p.b = {-0.4};
  Hyperparams hp;
  hp.prior_var_x = 2.0;
  hp.lambda1 = 1.5;
  std::vector<IssueMixture> mixtures = {{"B0", {1.0}}};

  double logit = (0.3 - 0.2) * 1.1 - 0.4;
  double hand = logit - std::log(1.0 + std::exp(logit));
  hand += -0.5 * std::log(2 * M_PI * 2.0) - 0.3 * 0.3 / (2.0 * 2.0);
  hand += std::log(1.5 / 2.0) - 1.5 * 0.2;
  hand += -0.5 * std::log(2 * M_PI) - 1.1 * 1.1 / 2.0;
  hand += -0.5 * std::log(2 * M_PI) - 0.4 * 0.4 / 2.0;
  CHECK(log_joint(p, data, mixtures, hp) == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("log joint requires mixtures for voted-on bills when K > 0") {
  auto data = testutil::grid_dataset(1, 2);
  auto p = zero_params(1, 2, 1);
  CHECK_THROWS_AS(log_joint(p, data, {{"B0", {1.0}}}, Hyperparams{}), DimensionError);
}

TEST_CASE("finite differences confirm the analytic log-joint gradient") {
  Hyperparams hp;
  hp.prior_var_x = 1.3;
  hp.prior_var_a = 0.8;
  hp.prior_var_b = 1.6;
  hp.lambda1 = 1.2;
  auto truth = sample_synthetic(3, 4, 2, hp, MixtureSource::Dirichlet, 1.0, 21);
  auto& p = truth.params;
  auto mix = mixture_map(truth.mixtures);
  auto lm_of = truth.dataset.lawmaker_index();
  auto bill_of = truth.dataset.bill_index();

  // analytic gradient: residual-weighted design terms plus prior scores
  int U = 3, D = 4, K = 2;
  std::vector<double> gx(U, 0), ga(D, 0), gb(D, 0);
  std::vector<std::vector<double>> gz(U, std::vector<double>(K, 0));
  for (const auto& v : truth.dataset.votes) {
    int u = lm_of.at(v.lawmaker_id);
    int d = bill_of.at(v.bill_id);
    const auto& theta = mix.at(v.bill_id);
    double r = (v.yea ? 1.0 : 0.0) - vote_probability(u, d, p, &theta);
    double pos = effective_ideal_point(u, p, theta);
    gx[u] += r * p.a[d];
    for (int k = 0; k < K; ++k) gz[u][k] += r * p.a[d] * theta[k];
    ga[d] += r * pos;
    gb[d] += r;
  }
  for (int u = 0; u < U; ++u) gx[u] -= p.x[u] / hp.prior_var_x;
  for (int u = 0; u < U; ++u)
    for (int k = 0; k < K; ++k) gz[u][k] -= hp.lambda1 * (p.z[u][k] > 0 ? 1.0 : -1.0);
  for (int d = 0; d < D; ++d) ga[d] -= p.a[d] / hp.prior_var_a;
  for (int d = 0; d < D; ++d) gb[d] -= p.b[d] / hp.prior_var_b;

  const double h = 1e-6;
  auto fd = [&](double* slot) {
    double orig = *slot;
    *slot = orig + h;
    double up = log_joint(p, truth.dataset, truth.mixtures, hp);
    *slot = orig - h;
    double dn = log_joint(p, truth.dataset, truth.mixtures, hp);
    *slot = orig;
    return (up - dn) / (2 * h);
  };

  std::vector<double> analytic, numeric;
  for (int u = 0; u < U; ++u) {
    analytic.push_back(gx[u]);
    numeric.push_back(fd(&p.x[u]));
    for (int k = 0; k < K; ++k) {
      analytic.push_back(gz[u][k]);
      numeric.push_back(fd(&p.z[u][k]));
    }
  }
  for (int d = 0; d < D; ++d) {
    analytic.push_back(ga[d]);
    numeric.push_back(fd(&p.a[d]));
    analytic.push_back(gb[d]);
    numeric.push_back(fd(&p.b[d]));
  }
  double num = 0, den = 0;
  for (size_t i = 0; i < analytic.size(); ++i) {
    num += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    den += analytic[i] * analytic[i];
  }
  CHECK(std::sqrt(num / den) < 1e-5);
}

TEST_CASE("synthetic generator") {
  Hyperparams hp;

  SUBCASE("huge lambda collapses the adjustments") {
    Hyperparams tight = hp;
    tight.lambda1 = 1e6;
    auto truth = sample_synthetic(10, 10, 10, tight, MixtureSource::Dirichlet, 1.0, 3);
    double mean_abs = 0;
    for (const auto& zu : truth.params.z)
      for (double zk : zu) mean_abs += std::fabs(zk);
    mean_abs /= 100.0;
    CHECK(mean_abs < 1e-4);
  }
  SUBCASE("K=1 one-hot mixtures are degenerate") {
    auto truth = sample_synthetic(3, 5, 1, hp, MixtureSource::OneHot, 1.0, 4);
    for (const auto& m : truth.mixtures) CHECK(m.theta == std::vector<double>{1.0});
  }
  SUBCASE("complete vote grid and sign-convention parties") {
    auto truth = sample_synthetic(6, 7, 2, hp, MixtureSource::Dirichlet, 1.0, 5);
    CHECK(truth.dataset.lawmakers.size() == 6);
    CHECK(truth.dataset.bills.size() == 7);
    CHECK(truth.dataset.votes.size() == 42);
    auto lm_of = truth.dataset.lawmaker_index();
    for (const auto& lm : truth.dataset.lawmakers) {
      bool right = truth.params.x[lm_of.at(lm.id)] >= 0;
      CHECK(lm.party == (right ? Party::Republican : Party::Democrat));
    }
    for (const auto& m : truth.mixtures) {
      double s = std::accumulate(m.theta.begin(), m.theta.end(), 0.0);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("flat truth redraw gives a fair coin within three standard errors") {
    auto truth = sample_synthetic(1000, 1, 1, hp, MixtureSource::OneHot, 1.0, 6);
    truth.params.x.assign(1000, 0.0);
    truth.params.z.assign(1000, std::vector<double>(1, 0.0));
    truth.params.a = {0.0};
    truth.params.b = {0.0};
    redraw_votes(truth, 9);
    double yea = 0;
    for (const auto& v : truth.dataset.votes) yea += v.yea;
    double rate = yea / 1000.0;
    CHECK(std::fabs(rate - 0.5) < 3.0 * std::sqrt(0.25 / 1000.0));
  }
  SUBCASE("redraw is deterministic in the seed") {
    auto t1 = sample_synthetic(5, 5, 2, hp, MixtureSource::Dirichlet, 1.0, 7);
    auto t2 = sample_synthetic(5, 5, 2, hp, MixtureSource::Dirichlet, 1.0, 7);
    redraw_votes(t1, 12);
    redraw_votes(t2, 12);
    CHECK(t1.dataset.votes == t2.dataset.votes);
    redraw_votes(t2, 13);
    CHECK(t1.dataset.votes != t2.dataset.votes);
  }
  SUBCASE("argument validation") {
    CHECK_THROWS_AS(sample_synthetic(0, 1, 1, hp, MixtureSource::OneHot, 1.0, 1),
                    InvalidArgument);
  }
}
