#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "rankmip/solver.hpp"
#include "test_util.hpp"

using namespace rankmip;
using testutil::epsilon_safe_dataset;
using testutil::extract_w;
using testutil::random_dataset;

namespace {

SolverConfig quick_config(double limit = 60.0) {
  SolverConfig c;
  c.time_limit_s = limit;
  return c;
}

FormulationConfig make_config(RankWeightVector w, double eps = 1e-5, double reg = 0.0) {
  FormulationConfig fc;
  fc.weights = std::move(w);
  fc.epsilon = eps;
  fc.reg_c = reg;
  return fc;
}

}  // namespace

TEST_CASE("two binaries against one packing row") {
  MilpModel m;
  int z1 = m.add_variable("z1", VarKind::Binary, 0, 1);
  int z2 = m.add_variable("z2", VarKind::Binary, 0, 1);
  m.add_objective_term(z1, 1.0);
  m.add_objective_term(z2, 1.0);
  m.add_constraint("pack", {{z1, 1.0}, {z2, 1.0}}, RowSense::LessEqual, 1.0);
  auto sol = solve_milp(m, quick_config());
  REQUIRE(sol.status == MilpSolution::Status::Optimal);
  CHECK(sol.objective == Catch::Approx(1.0));
  CHECK(sol.gap <= 1e-7);
}

TEST_CASE("crossing integer bounds detected at the root") {
  MilpModel m;
  int z = m.add_variable("z", VarKind::Binary, 0, 1);
  m.add_objective_term(z, 1.0);
  m.add_constraint("lo", {{z, 1.0}}, RowSense::GreaterEqual, 0.7);
  m.add_constraint("hi", {{z, 1.0}}, RowSense::LessEqual, 0.3);
  auto sol = solve_milp(m, quick_config());
  CHECK(sol.status == MilpSolution::Status::Infeasible);
}

TEST_CASE("separable auc instance certifies every pair") {
  // 3 positives strictly above 3 negatives along x1
  Matrix x(6, 2);
  std::vector<int> y(6);
  for (int i = 0; i < 6; ++i) {
    x.at(i, 0) = i < 3 ? 0.5 + 0.1 * i : -0.5 - 0.1 * i;
    x.at(i, 1) = 0.3 * ((i * 7) % 5 - 2);
    y[i] = i < 3 ? 1 : 0;
  }
  Dataset data(x, y);
  auto model = build_auc(data, make_config(RankWeightVector::wrs(6)));
  auto sol = solve_milp(model, quick_config(), make_rank_completion(model, data));
  REQUIRE(sol.status == MilpSolution::Status::Optimal);
  CHECK(sol.objective == Catch::Approx(9.0));
}

TEST_CASE("auc with an unreachable margin certifies nothing") {
  // max score spread under |w| <= 1 is 0.08, far below eps = 0.9
  Matrix x(2, 1);
  x.at(0, 0) = 0.04;
  x.at(1, 0) = -0.04;
  Dataset data(x, {1, 0});
  auto model = build_auc(data, make_config(RankWeightVector::wrs(2), 0.9));
  auto sol = solve_milp(model, quick_config(), make_rank_completion(model, data));
  REQUIRE(sol.status == MilpSolution::Status::Optimal);
  CHECK(sol.objective == Catch::Approx(0.0));
}

TEST_CASE("two-point resolved rank solve recovers the perfect list") {
  Matrix x(2, 1);
  x.at(0, 0) = 0.6;
  x.at(1, 0) = -0.2;
  Dataset data(x, {1, 0});
  auto model = build_resolved_rank(data, make_config(RankWeightVector::wrs(2)));
  auto sol = solve_milp(model, quick_config(), make_rank_completion(model, data));
  REQUIRE(sol.status == MilpSolution::Status::Optimal);
  CHECK(sol.objective == Catch::Approx(2.0));  // offset 1 + increment 1

  auto sub = build_subrank(data, make_config(RankWeightVector::wrs(2)));
  auto sol2 = solve_milp(sub, quick_config(), make_rank_completion(sub, data));
  REQUIRE(sol2.status == MilpSolution::Status::Optimal);
  CHECK(sol2.objective == Catch::Approx(sol.objective));
}

TEST_CASE("dominant regularization empties the support") {
  Rng rng(61);
  Dataset data = random_dataset(rng, 6, 2);
  auto w = RankWeightVector::wrs(6);
  double huge_c = 6.0 * w.value_at(6) + 1.0;
  auto model = build_subrank(data, make_config(w, 1e-5, huge_c));
  auto sol = solve_milp(model, quick_config(), make_rank_completion(model, data));
  REQUIRE(sol.status == MilpSolution::Status::Optimal);
  auto wopt = extract_w(model, sol.values, 2);
  CHECK(std::fabs(wopt[0]) <= 1e-9);
  CHECK(std::fabs(wopt[1]) <= 1e-9);
  // all-ties objective: every positive keeps subrank 0
  CHECK(sol.objective == Catch::Approx(data.num_positives() * w.value_at(1)));
}

TEST_CASE("random subrank solves match the arrangement oracle") {
  Rng rng(505);
  for (int trial = 0; trial < 6; ++trial) {
    auto weights = RankWeightVector::wrs(8);
    OracleResult oracle;
    Dataset data = epsilon_safe_dataset(rng, 8, 2, weights, 0.0, 1e-5, &oracle);
    auto model = build_subrank(data, make_config(weights, 1e-5, 0.0));
    auto sol = solve_milp(model, quick_config(), make_rank_completion(model, data));
    REQUIRE(sol.status == MilpSolution::Status::Optimal);
    CHECK(sol.objective == Catch::Approx(oracle.best_objective).margin(1e-6));
  }
}

TEST_CASE("resolved rank solutions carry a rank permutation") {
  Rng rng(99);
  auto weights = RankWeightVector::dcg(7);
  Dataset data = epsilon_safe_dataset(rng, 7, 2, weights, 0.0, 1e-5);
  auto model = build_resolved_rank(data, make_config(weights, 1e-5, 0.0));
  auto sol = solve_milp(model, quick_config(), make_rank_completion(model, data));
  REQUIRE(sol.status == MilpSolution::Status::Optimal);
  std::vector<int> ranks;
  for (int i = 0; i < data.n(); ++i) {
    int v = model.find_variable("r[" + std::to_string(i) + "]");
    ranks.push_back(static_cast<int>(std::lround(sol.values[v])));
  }
  std::sort(ranks.begin(), ranks.end());
  for (int i = 0; i < data.n(); ++i) CHECK(ranks[i] == i);
}

TEST_CASE("optimal objective equals the list evaluation of the solved scorer") {
  Rng rng(2718);
  for (int trial = 0; trial < 4; ++trial) {
    auto weights = RankWeightVector::dcg(7);
    Dataset data = epsilon_safe_dataset(rng, 7, 2, weights, 0.0, 1e-5);
    for (bool resolved : {false, true}) {
      auto cfg = make_config(weights, 1e-5, 0.0);
      auto model = resolved ? build_resolved_rank(data, cfg) : build_subrank(data, cfg);
      auto sol = solve_milp(model, quick_config(), make_rank_completion(model, data));
      REQUIRE(sol.status == MilpSolution::Status::Optimal);
      LinearScorer scorer(extract_w(model, sol.values, 2));
      auto s = score(data, scorer);
      double eval = evaluate_clrs(s, data.labels, weights,
                                  resolved ? RankMode::ResolvedRank : RankMode::Subrank);
      CHECK(sol.objective == Catch::Approx(eval).margin(1e-6));
    }
  }
}

TEST_CASE("strengthening rows leave the subrank optimum unchanged") {
  Rng rng(42);
  for (int trial = 0; trial < 3; ++trial) {
    auto weights = RankWeightVector::wrs(7);
    Dataset data = epsilon_safe_dataset(rng, 7, 2, weights, 0.0, 1e-5);
    auto cfg = make_config(weights, 1e-5, 0.0);
    auto plain_model = build_subrank(data, cfg);
    auto plain = solve_milp(plain_model, quick_config(), make_rank_completion(plain_model, data));
    cfg.include_strengthening = true;
    auto model = build_subrank(data, cfg);
    auto strong = solve_milp(model, quick_config(), make_rank_completion(model, data));
    REQUIRE(plain.status == MilpSolution::Status::Optimal);
    REQUIRE(strong.status == MilpSolution::Status::Optimal);
    CHECK(plain.objective == Catch::Approx(strong.objective).margin(1e-6));
  }
}

TEST_CASE("pairwise chain on a separable line certifies all pairs") {
  Matrix x(3, 1);
  x.at(0, 0) = -0.5;
  x.at(1, 0) = 0.0;
  x.at(2, 0) = 0.5;
  std::vector<int> cls{0, 1, 2};  // 2 above 1 above 0
  auto prefs = PreferenceMatrix::multipartite(cls);
  CHECK(prefs.pairs().size() == 3);
  FormulationConfig fc = make_config(RankWeightVector::wrs(3), 1e-5, 0.0);
  auto model = build_pairwise(x, prefs, fc);
  auto sol = solve_milp(model, quick_config());
  REQUIRE(sol.status == MilpSolution::Status::Optimal);
  CHECK(sol.objective == Catch::Approx(3.0));
}

TEST_CASE("traces are monotone and deterministic under the virtual clock") {
  Rng rng(777);
  Dataset data = random_dataset(rng, 14, 2);
  auto model = build_subrank(data, make_config(RankWeightVector::dcg(14), 1e-5, 1e-4));
  SolverConfig cfg;
  cfg.time_limit_s = 1.5;
  cfg.clock_mode = WorkClock::Mode::Deterministic;
  auto run1 = solve_milp(model, cfg, make_rank_completion(model, data));
  auto run2 = solve_milp(model, cfg, make_rank_completion(model, data));

  REQUIRE(run1.trace.size() >= 2);
  REQUIRE(run1.trace.size() == run2.trace.size());
  for (size_t i = 0; i < run1.trace.size(); ++i) {
    CHECK(run1.trace[i].elapsed_s == run2.trace[i].elapsed_s);
    CHECK(run1.trace[i].incumbent == run2.trace[i].incumbent);
    CHECK(run1.trace[i].bound == run2.trace[i].bound);
  }
  for (size_t i = 1; i < run1.trace.size(); ++i) {
    CHECK(run1.trace[i].incumbent >= run1.trace[i - 1].incumbent);
    CHECK(run1.trace[i].bound <= run1.trace[i - 1].bound + 1e-12);
  }
  for (const auto& p : run1.trace) CHECK(p.gap() >= -1e-7);
  CHECK(run1.node_count == run2.node_count);
}

TEST_CASE("time limit yields a feasible incumbent and honest status") {
  Rng rng(31337);
  Dataset data = random_dataset(rng, 24, 2);
  auto model = build_subrank(data, make_config(RankWeightVector::dcg(24), 1e-5, 1e-4));
  SolverConfig cfg;
  cfg.time_limit_s = 0.5;
  auto sol = solve_milp(model, cfg, make_rank_completion(model, data));
  if (sol.status == MilpSolution::Status::FeasibleTimeLimit) {
    CHECK(sol.objective > -kInf);
    CHECK(sol.best_bound >= sol.objective - 1e-9);
  } else {
    CHECK(sol.status == MilpSolution::Status::Optimal);
  }
  // the root heuristic fires before the first LP, so an incumbent exists
  REQUIRE_FALSE(sol.trace.empty());
  CHECK(sol.trace.front().incumbent > -kInf);
}

TEST_CASE("pseudo-cost branching solves the same instances") {
  Rng rng(888);
  auto weights = RankWeightVector::wrs(7);
  OracleResult oracle;
  Dataset data = epsilon_safe_dataset(rng, 7, 2, weights, 0.0, 1e-5, &oracle);
  auto model = build_subrank(data, make_config(weights, 1e-5, 0.0));
  SolverConfig cfg = quick_config();
  cfg.branching = SolverConfig::Branching::PseudoCostLite;
  auto sol = solve_milp(model, cfg, make_rank_completion(model, data));
  REQUIRE(sol.status == MilpSolution::Status::Optimal);
  CHECK(sol.objective == Catch::Approx(oracle.best_objective).margin(1e-6));

  cfg.node_selection = SolverConfig::NodeSelection::DepthFirstDive;
  auto dfs = solve_milp(model, cfg, make_rank_completion(model, data));
  REQUIRE(dfs.status == MilpSolution::Status::Optimal);
  CHECK(dfs.objective == Catch::Approx(oracle.best_objective).margin(1e-6));
}

TEST_CASE("trace csv export round trips the rows") {
  MilpModel m;
  int z = m.add_variable("z", VarKind::Binary, 0, 1);
  m.add_objective_term(z, 2.0);
  auto sol = solve_milp(m, quick_config());
  REQUIRE(sol.status == MilpSolution::Status::Optimal);
  std::string path = "trace_test_tmp.csv";
  write_trace_csv(sol, path);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "elapsed_s,incumbent,bound,gap");
  int rows = 0;
  std::string line;
  while (std::getline(f, line)) ++rows;
  CHECK(rows == static_cast<int>(sol.trace.size()));
  std::remove(path.c_str());
}
