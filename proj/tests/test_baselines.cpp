#include <catch2/catch_amalgamated.hpp>

#include "rankmip/baselines.hpp"
#include "rankmip/ranking.hpp"
#include "test_util.hpp"

using namespace rankmip;
using testutil::random_dataset;

namespace {

// Central finite differences of a loss callable at w.
std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& loss,
                                std::vector<double> w, double h = 1e-5) {
  std::vector<double> g(w.size());
  for (size_t j = 0; j < w.size(); ++j) {
    double keep = w[j];
    w[j] = keep + h;
    double up = loss(w);
    w[j] = keep - h;
    double dn = loss(w);
    w[j] = keep;
    g[j] = (up - dn) / (2.0 * h);
  }
  return g;
}

void check_gradient(const Dataset& data,
                    const std::function<double(const std::vector<double>&, std::vector<double>*)>& eval,
                    Rng& rng, int points = 20) {
  for (int t = 0; t < points; ++t) {
    std::vector<double> w(data.dim());
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    std::vector<double> analytic;
    eval(w, &analytic);
    auto numeric = fd_gradient([&](const std::vector<double>& x) { return eval(x, nullptr); }, w);
    for (int j = 0; j < data.dim(); ++j) {
      double denom = std::max(1.0, std::fabs(numeric[j]));
      CHECK(std::fabs(analytic[j] - numeric[j]) / denom <= 1e-4);
    }
  }
}

}  // namespace

TEST_CASE("all four loss gradients match central finite differences") {
  Rng rng(2020);
  Dataset data = random_dataset(rng, 14, 3);
  check_gradient(data, [&](const std::vector<double>& w, std::vector<double>* g) {
    return logistic_loss(data, w, 0.0, g, nullptr);
  }, rng);
  check_gradient(data, [&](const std::vector<double>& w, std::vector<double>* g) {
    return exponential_pairwise_loss(data, w, g);
  }, rng);
  check_gradient(data, [&](const std::vector<double>& w, std::vector<double>* g) {
    return pnorm_push_loss(data, w, 2.0, g);
  }, rng);
  // hinge is piecewise linear; random points sit off the kinks almost surely
  check_gradient(data, [&](const std::vector<double>& w, std::vector<double>* g) {
    return hinge_pairwise_objective(data, w, 0.5, g);
  }, rng);
}

TEST_CASE("losses at w=0 take their counting values") {
  Rng rng(9);
  Dataset data = random_dataset(rng, 11, 2);
  double np = data.num_positives(), nn = data.n() - np;
  std::vector<double> zero(data.dim(), 0.0);
  CHECK(exponential_pairwise_loss(data, zero) == Catch::Approx(np * nn));
  CHECK(pnorm_push_loss(data, zero, 2.0) == Catch::Approx(nn * np * np));
  CHECK(pnorm_push_loss(data, zero, 3.0) == Catch::Approx(nn * np * np * np));
  CHECK(logistic_loss(data, zero, 0.0) == Catch::Approx(data.n() * std::log(2.0)));
}

TEST_CASE("push at p=1 is exactly the exponential pairwise loss") {
  Rng rng(123);
  Dataset data = random_dataset(rng, 9, 2);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> w{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    CHECK(pnorm_push_loss(data, w, 1.0) ==
          Catch::Approx(exponential_pairwise_loss(data, w)).epsilon(1e-12));
  }
}

TEST_CASE("logistic training separates a one-dimensional problem") {
  Matrix x(6, 1);
  std::vector<int> y(6);
  for (int i = 0; i < 6; ++i) {
    x.at(i, 0) = i < 3 ? 1.0 : -1.0;
    y[i] = i < 3 ? 1 : 0;
  }
  Dataset data(x, y);
  TrainConfig tc;
  auto model = train_logistic(data, tc);
  CHECK(model.scorer.weights[0] > 0.0);
  CHECK(model.final_loss < 6.0 * std::log(2.0));
  CHECK(model.iterations_used >= 1);
}

TEST_CASE("logistic training is symmetric under label flips") {
  Rng rng(55);
  Dataset data = random_dataset(rng, 12, 2);
  Dataset flipped = data;
  for (int i = 0; i < data.n(); ++i) {
    flipped.labels[i] = 1 - data.labels[i];
    for (int j = 0; j < data.dim(); ++j) flipped.features.at(i, j) = -data.features.at(i, j);
  }
  TrainConfig tc;
  auto a = train_logistic(data, tc);
  auto b = train_logistic(flipped, tc);
  // negating x and flipping labels leaves the objective invariant
  REQUIRE(a.iterations_used == b.iterations_used);
  CHECK(a.final_loss == Catch::Approx(b.final_loss).margin(1e-9));
  for (int j = 0; j < data.dim(); ++j) CHECK(a.scorer.weights[j] == Catch::Approx(b.scorer.weights[j]).margin(1e-9));
}

TEST_CASE("exponential trainer drives separable loss toward zero") {
  Matrix x(8, 1);
  std::vector<int> y(8);
  for (int i = 0; i < 8; ++i) {
    x.at(i, 0) = i < 4 ? 0.5 + 0.1 * i : -0.5 - 0.1 * i;
    y[i] = i < 4 ? 1 : 0;
  }
  Dataset data(x, y);
  TrainConfig tc;
  tc.max_iters = 2000;
  auto model = train_exponential_pairwise(data, tc);
  CHECK(model.final_loss < 1e-3);
  CHECK(model.scorer.weights[0] > 0.0);
}

TEST_CASE("accepted-step losses never increase") {
  Rng rng(777);
  Dataset data = random_dataset(rng, 10, 2);
  // re-run each trainer with growing iteration budgets; the reported best
  // loss must be monotone in the budget
  for (auto method : {BaseMethod::Logistic, BaseMethod::ExponentialPairwise, BaseMethod::PnormPush,
                      BaseMethod::HingePairwise}) {
    double prev = kInf;
    for (int iters : {1, 5, 25, 125}) {
      TrainConfig tc;
      tc.max_iters = iters;
      auto model = train_base(data, method, tc);
      CHECK(model.final_loss <= prev + 1e-9);
      prev = model.final_loss;
    }
  }
}

TEST_CASE("huge quadratic penalty pins the hinge trainer at zero") {
  Rng rng(31);
  Dataset data = random_dataset(rng, 10, 2);
  TrainConfig tc;
  tc.l2_c = 1e9;
  tc.max_iters = 300;
  auto model = train_hinge_pairwise(data, tc);
  double np = data.num_positives(), nn = data.n() - np;
  for (double v : model.scorer.weights) CHECK(std::fabs(v) < 1e-3);
  CHECK(model.final_loss >= np * nn - 1e-6);  // hinge term alone at w=0
}

TEST_CASE("hinge trainer beats the zero scorer on separable data") {
  Matrix x(10, 2);
  std::vector<int> y(10);
  for (int i = 0; i < 10; ++i) {
    x.at(i, 0) = i < 5 ? 0.6 + 0.05 * i : -0.6 - 0.05 * i;
    x.at(i, 1) = 0.1 * ((i * 3) % 7 - 3);
    y[i] = i < 5 ? 1 : 0;
  }
  Dataset data(x, y);
  TrainConfig tc;
  tc.l2_c = 1e-4;
  tc.max_iters = 2000;
  tc.step_size = 0.05;
  auto model = train_hinge_pairwise(data, tc);
  CHECK(model.final_loss < 0.01 * 25.0 + 1.0);  // far below the 25 at w=0
  CHECK(auc(score(data, model.scorer), y) == 1.0);
}

TEST_CASE("positive scaling preserves subrank assignments") {
  Rng rng(13);
  Dataset data = random_dataset(rng, 12, 3);
  TrainConfig tc;
  auto model = train_logistic(data, tc);
  auto base_ranks = assign_ranks(score(data, model.scorer), data.labels, RankMode::Subrank);
  for (double c : {0.1, 2.0, 137.0}) {
    LinearScorer scaled = model.scorer;
    for (auto& v : scaled.weights) v *= c;
    auto ranks = assign_ranks(score(data, scaled), data.labels, RankMode::Subrank);
    CHECK(ranks.ranks == base_ranks.ranks);
  }
}

TEST_CASE("trainers validate their inputs") {
  Matrix x(3, 1);
  x.at(0, 0) = 1;
  x.at(1, 0) = 2;
  x.at(2, 0) = 3;
  Dataset single(x, {1, 1, 1});
  TrainConfig tc;
  CHECK_THROWS_AS(train_logistic(single, tc), ValidationError);
  CHECK_THROWS_AS(train_exponential_pairwise(single, tc), ValidationError);
  tc.max_iters = 0;
  Dataset ok(x, {1, 0, 1});
  CHECK_THROWS_AS(train_logistic(ok, tc), ValidationError);
  tc.max_iters = 10;
  tc.p = 0.5;
  CHECK_THROWS_AS(train_pnorm_push(ok, tc), ValidationError);
}
