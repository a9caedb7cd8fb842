#include <catch2/catch_amalgamated.hpp>

#include "rankmip/formulations.hpp"

using namespace rankmip;

namespace {

Dataset tiny_dataset() {
  // 2 positives, 1 negative in one dimension
  Matrix x(3, 1);
  x.at(0, 0) = 2.0;
  x.at(1, 0) = 1.0;
  x.at(2, 0) = 0.0;
  return Dataset(x, {1, 1, 0});
}

FormulationConfig wrs_config(int n) {
  FormulationConfig c;
  c.weights = RankWeightVector::wrs(n);
  c.epsilon = 1e-4;
  c.reg_c = 0.0;
  return c;
}

}  // namespace

TEST_CASE("resolved-rank model has the closed-form variable counts") {
  auto data = tiny_dataset();
  auto m = build_resolved_rank(data, wrs_config(3));
  int n = 3, d = 1, n_pos = 2, sr = 2;
  CHECK(m.count_variables_with_prefix("w[") == d);
  CHECK(m.count_variables_with_prefix("gamma[") == d);
  CHECK(m.count_variables_with_prefix("z[") == n * n - n);
  CHECK(m.count_variables_with_prefix("r[") == n);
  CHECK(m.count_variables_with_prefix("t[") == n_pos * sr);
  CHECK(m.num_variables() == 2 * d + n * n - n + n_pos * sr + n);
  CHECK(m.objective_offset == Catch::Approx(n_pos * 1.0));
  CHECK(m.formulation == "resolved-rank");
}

TEST_CASE("subrank model matches its variable-count identity") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    int n = rng.uniform_int(3, 9), d = rng.uniform_int(1, 3);
    Matrix x(n, d);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) x.at(i, j) = rng.uniform(-1, 1);
      y[i] = i % 2;
    }
    Dataset data(x, y);
    auto cfg = wrs_config(n);
    auto m = build_subrank(data, cfg);
    int n_pos = data.num_positives();
    int sr = static_cast<int>(cfg.weights.support().size());
    CHECK(m.num_variables() == 2 * d + n_pos * n + n_pos * sr);
    // the paper counts diagonal z's; with those omitted the gap is n_- * n
    auto rr = build_resolved_rank(data, cfg);
    CHECK(rr.num_variables() - m.num_variables() == (n - n_pos) * n);
  }
}

TEST_CASE("builders reject degenerate inputs") {
  auto data = tiny_dataset();
  auto cfg = wrs_config(3);
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(build_resolved_rank(data, cfg), ValidationError);
  cfg.epsilon = 1e-4;
  cfg.reg_c = -1.0;
  CHECK_THROWS_AS(build_subrank(data, cfg), ValidationError);

  auto flat = wrs_config(3);
  flat.weights = RankWeightVector::from_values({2.0, 2.0, 2.0});
  CHECK_THROWS_AS(build_subrank(data, flat), ValidationError);

  Matrix x(2, 1);
  x.at(0, 0) = 0.0;
  x.at(1, 0) = 1.0;
  Dataset single(x, {1, 1});
  CHECK_THROWS_AS(build_resolved_rank(single, wrs_config(2)), ValidationError);
  CHECK_THROWS_AS(build_auc(single, wrs_config(2)), ValidationError);
}

TEST_CASE("duplicate rows produce a warning and strengthened z fixings") {
  Matrix x(4, 2);
  x.at(0, 0) = 1.0; x.at(0, 1) = 2.0;
  x.at(1, 0) = 1.0; x.at(1, 1) = 2.0;  // duplicate of row 0
  x.at(2, 0) = 0.0; x.at(2, 1) = 0.0;
  x.at(3, 0) = 3.0; x.at(3, 1) = 1.0;
  Dataset data(x, {1, 0, 0, 1});
  CHECK(data.duplicate_row_pairs() == std::vector<std::pair<int, int>>{{0, 1}});

  auto cfg = wrs_config(4);
  cfg.include_strengthening = true;
  auto m = build_subrank(data, cfg);
  REQUIRE_FALSE(m.build_warnings.empty());
  int z01 = m.find_variable("z[0][1]");
  REQUIRE(z01 >= 0);
  CHECK(m.variables[z01].ub == 0.0);
  int z00 = m.find_variable("z[0][0]");
  CHECK(m.variables[z00].ub == 0.0);  // diagonal is a duplicate of itself
  int z03 = m.find_variable("z[0][3]");
  CHECK(m.variables[z03].ub == 1.0);
}

TEST_CASE("strengthening adds the pairing, monotonicity and cap rows") {
  auto data = tiny_dataset();
  auto cfg = wrs_config(3);
  auto plain = build_subrank(data, cfg);
  cfg.include_strengthening = true;
  auto strong = build_subrank(data, cfg);
  CHECK(strong.num_variables() == plain.num_variables());
  CHECK(strong.num_constraints() > plain.num_constraints());
}

TEST_CASE("auc model declares one z per positive-negative pair") {
  Matrix x(4, 2);
  for (int i = 0; i < 4; ++i) {
    x.at(i, 0) = i;
    x.at(i, 1) = -i;
  }
  Dataset data(x, {1, 1, 0, 0});
  auto m = build_auc(data, wrs_config(4));
  CHECK(m.count_variables_with_prefix("z[") == 4);
  CHECK(m.num_variables() == 2 * 2 + 4);
  CHECK(m.objective_offset == 0.0);
}

TEST_CASE("preference matrix rejects self pairs and contradictions") {
  PreferenceMatrix pm(3);
  pm.add(0, 1);
  CHECK_THROWS_AS(pm.add(1, 0), ValidationError);
  CHECK_THROWS_AS(pm.add(2, 2), ValidationError);
  CHECK_THROWS_AS(PreferenceMatrix(1), ValidationError);
}

TEST_CASE("bipartite preferences reproduce the auc model up to naming") {
  Matrix x(5, 2);
  Rng rng(17);
  std::vector<int> y{1, 0, 1, 0, 0};
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 2; ++j) x.at(i, j) = rng.uniform(-1, 1);
  }
  Dataset data(x, y);
  auto cfg = wrs_config(5);
  auto auc_model = build_auc(data, cfg);
  auto pair_model = build_pairwise(data.features, PreferenceMatrix::bipartite(y), cfg);
  CHECK(pair_model.num_variables() == auc_model.num_variables());
  CHECK(pair_model.num_constraints() == auc_model.num_constraints());
  CHECK(pair_model.objective.size() == auc_model.objective.size());
}

TEST_CASE("empty preferences are rejected") {
  Matrix x(2, 1);
  x.at(0, 0) = 0.0;
  x.at(1, 0) = 1.0;
  PreferenceMatrix pm(2);
  CHECK_THROWS_AS(build_pairwise(x, pm, wrs_config(2)), ValidationError);
}

TEST_CASE("lp text export is deterministic and complete") {
  auto data = tiny_dataset();
  auto m = build_subrank(data, wrs_config(3));
  auto text = m.to_lp_text();
  CHECK(text == m.to_lp_text());
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("Bounds") != std::string::npos);
  CHECK(text.find("Binaries") != std::string::npos);
  CHECK(text.find("z[0][1]") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
  auto rr = build_resolved_rank(data, wrs_config(3));
  CHECK(rr.to_lp_text().find("Generals") != std::string::npos);  // integer ranks
}

TEST_CASE("epsilon feasibility window accounts for both gap extremes") {
  Matrix x(3, 1);
  x.at(0, 0) = 1.0;
  x.at(1, 0) = 0.5;
  x.at(2, 0) = 0.0;
  Dataset data(x, {1, 1, 0});
  // at ||w||inf = 1 gaps are 0.5 and 1.0: max gap 1.0 > 1 - eps forces a
  // rescale, which the window absorbs for small eps
  auto f = check_epsilon_feasible(data, LinearScorer({1.0}), 1e-4);
  CHECK(f.feasible);
  CHECK(f.scale < 1.0);
  CHECK(f.scale * f.min_positive_gap >= 1e-4);
  CHECK(f.scale * f.max_gap <= 1.0 - 1e-4);

  // min gap 0.5, max gap 1.0: needs eps/(1-eps) <= 0.5, so eps = 0.4 fails
  auto tight = check_epsilon_feasible(data, LinearScorer({1.0}), 0.4);
  CHECK_FALSE(tight.feasible);

  auto ties = check_epsilon_feasible(data, LinearScorer({0.0}), 1e-4);
  CHECK(ties.feasible);
}
