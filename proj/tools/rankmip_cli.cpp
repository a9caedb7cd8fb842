// Command-line front end: synthetic data generation, statistic evaluation,
// baseline training, exact solves, reranking, and the multi-trial experiment
// protocol. Exit codes: 0 ok, 2 validation error, 3 solver failure,
// 4 experiment finished with per-trial failures.
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rankmip/data_io.hpp"
#include "rankmip/equivalence.hpp"
#include "rankmip/experiment.hpp"
#include "rankmip/oracle.hpp"
#include "rankmip/rerank.hpp"
#include "rankmip/solver.hpp"
#include "rankmip/synthetic.hpp"

using namespace rankmip;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitPartialExperiment = 4;

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

RankMode parse_mode(const std::string& s) {
  if (s == "subrank") return RankMode::Subrank;
  if (s == "resolved-rank") return RankMode::ResolvedRank;
  if (s == "rank-cv") return RankMode::RankCv;
  throw ValidationError("unknown rank mode: " + s);
}

int cmd_synth(const std::string& name, uint64_t seed, const std::string& out) {
  Dataset d = generate_synthetic(name, seed);
  save_csv(d, out);
  std::printf("wrote %s: n=%d d=%d positives=%d\n", out.c_str(), d.n(), d.dim(), d.num_positives());
  return 0;
}

int cmd_eval(const std::string& data_path, const std::string& model_path, const std::string& stat,
             const std::string& mode) {
  std::vector<std::string> warnings;
  Dataset data = load_csv(data_path, &warnings);
  print_warnings(warnings);
  ModelFile model = load_model(model_path);
  if (model.scaling) {
    // score in the model's training scale, not the eval file's own ranges
    Dataset raw = data.unscaled();
    Matrix x(raw.n(), raw.dim());
    for (int i = 0; i < raw.n(); ++i) {
      for (int j = 0; j < raw.dim(); ++j) x.at(i, j) = model.scaling->forward(raw.features.at(i, j), j);
    }
    data = Dataset(std::move(x), raw.labels, raw.feature_names);
    data.scaling = model.scaling;
  }
  auto s = score(data, model.scorer);
  for (auto& v : s) v += model.intercept;
  WeightSpec spec = WeightSpec::parse(stat);
  double value = evaluate_clrs(s, data.labels, spec.materialize(data.n()), parse_mode(mode));
  std::printf("%s[%s] = %.17g\n", stat.c_str(), mode.c_str(), value);
  if (data.has_both_classes()) {
    std::printf("auc = %.17g\n", auc(s, data.labels));
    std::printf("wrs = %.17g\n", wrs(s, data.labels));
  }
  return 0;
}

int cmd_train_base(const std::string& method, const std::string& data_path, const std::string& out,
                   int max_iters) {
  std::vector<std::string> warnings;
  Dataset data = load_csv(data_path, &warnings);
  print_warnings(warnings);
  TrainConfig tc;
  tc.max_iters = max_iters;
  BaseMethod m = parse_base_method(method);
  TrainedModel t = train_base(data, m, tc);
  save_model(model_file_from(t, m, data.scaling), out);
  std::printf("trained %s: loss=%.6g iters=%d converged=%d -> %s\n", method.c_str(), t.final_loss,
              t.iterations_used, t.converged, out.c_str());
  return 0;
}

int cmd_solve(const std::string& data_path, const std::string& formulation, const std::string& stat,
              double epsilon, double reg_c, double time_limit, const std::string& trace_out,
              const std::string& export_lp, const std::string& model_out, bool strengthen) {
  std::vector<std::string> warnings;
  Dataset data = load_csv(data_path, &warnings);
  print_warnings(warnings);

  FormulationConfig fc;
  fc.epsilon = epsilon;
  fc.reg_c = reg_c;
  fc.include_strengthening = strengthen;
  fc.weights = WeightSpec::parse(stat).materialize(data.n());

  MilpModel model;
  if (formulation == "subrank") model = build_subrank(data, fc);
  else if (formulation == "resolved-rank") model = build_resolved_rank(data, fc);
  else if (formulation == "auc") model = build_auc(data, fc);
  else throw ValidationError("unknown formulation: " + formulation);
  print_warnings(model.build_warnings);

  if (!export_lp.empty()) {
    std::ofstream f(export_lp);
    if (!f) throw ValidationError("cannot open " + export_lp);
    f << model.to_lp_text();
  }

  SolverConfig sc;
  sc.time_limit_s = time_limit;
  MilpSolution sol = solve_milp(model, sc, make_rank_completion(model, data));
  if (!trace_out.empty()) write_trace_csv(sol, trace_out);

  std::printf("status=%s objective=%.10g bound=%.10g gap=%.3g nodes=%ld time=%.2fs\n",
              MilpSolution::status_name(sol.status), sol.objective, sol.best_bound, sol.gap,
              sol.node_count, sol.solve_seconds);
  if (sol.values.empty()) return kExitSolver;
  std::vector<double> w(data.dim());
  for (int j = 0; j < data.dim(); ++j) w[j] = sol.values[model.find_variable("w[" + std::to_string(j) + "]")];
  std::printf("w =");
  for (double v : w) std::printf(" %.10g", v);
  std::printf("\n");
  if (!model_out.empty()) {
    ModelFile mf;
    mf.scorer = LinearScorer(w);
    mf.scaling = data.scaling;
    mf.method = formulation;
    mf.final_loss = -sol.objective;
    mf.converged = sol.status == MilpSolution::Status::Optimal;
    save_model(mf, model_out);
  }
  if (sol.status == MilpSolution::Status::Infeasible || sol.status == MilpSolution::Status::Unbounded)
    return kExitSolver;
  return 0;
}

int cmd_rerank(const std::string& data_path, const std::string& test_path, int k, bool full,
               const std::string& base, const std::string& stat, const std::string& formulation,
               double epsilon, double reg_c, double time_limit, const std::string& out) {
  std::vector<std::string> warnings;
  Dataset train = load_csv(data_path, &warnings);
  print_warnings(warnings);

  RerankConfig rc;
  rc.k = k;
  rc.full_list = full;
  rc.base = parse_base_method(base);
  rc.statistic = WeightSpec::parse(stat);
  rc.formulation = parse_formulation(formulation);
  rc.epsilon = epsilon;
  rc.reg_c = reg_c;
  rc.solver.time_limit_s = time_limit;

  RerankResult rr = rerank_train(train, rc);
  nlohmann::json j{{"k", full ? -1 : k},
                   {"full_list", full},
                   {"base", base},
                   {"statistic", stat},
                   {"formulation", formulation},
                   {"epsilon", epsilon},
                   {"reg_c", reg_c},
                   {"base_weights", rr.base_model.scorer.weights},
                   {"base_intercept", rr.base_model.intercept},
                   {"head_weights", rr.head_scorer.weights},
                   {"threshold", rr.threshold},
                   {"head_size", rr.head_indices.size()},
                   {"base_epsilon_feasible", rr.base_epsilon_feasible},
                   {"head_clrs_base", rr.head_clrs_base},
                   {"head_clrs_reranked", rr.head_clrs_reranked},
                   {"solver",
                    {{"status", MilpSolution::status_name(rr.solve.status)},
                     {"objective", rr.solve.objective},
                     {"bound", rr.solve.best_bound},
                     {"gap", rr.solve.gap},
                     {"nodes", rr.solve.node_count},
                     {"seconds", rr.solve.solve_seconds}}},
                   {"train_eval_base", rr.train_eval_base},
                   {"train_eval_reranked", rr.train_eval_reranked}};
  std::printf("train %s: base=%.10g reranked=%.10g (head %zu items, solver %s)\n", stat.c_str(),
              rr.train_eval_base.at(stat), rr.train_eval_reranked.at(stat), rr.head_indices.size(),
              MilpSolution::status_name(rr.solve.status));

  if (!test_path.empty()) {
    Dataset test = load_csv(test_path);
    auto applied = rerank_apply(test, rr, rc);
    j["test_eval_base"] = applied.eval_base;
    j["test_eval_reranked"] = applied.eval_reranked;
    j["test_order"] = applied.order;
    std::printf("test %s: base=%.10g reranked=%.10g\n", stat.c_str(), applied.eval_base.at(stat),
                applied.eval_reranked.at(stat));
  }
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw ValidationError("cannot open " + out);
    f << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_experiment(const std::string& spec_path) {
  std::ifstream f(spec_path);
  if (!f) throw ValidationError("cannot open " + spec_path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(spec_path + " is not valid JSON: " + e.what());
  }
  ExperimentSpec spec = ExperimentSpec::from_json(j);
  ExperimentOutput out = run_experiment(spec);
  std::printf("experiment: %d trial(s) -> %s\n", spec.trials, out.results_csv_path.c_str());
  for (const auto& row : out.aggregate) {
    std::printf("  %-40s train %.4f +- %.4f   test %.4f +- %.4f  (%d)\n", row.key.c_str(), row.train_mean,
                row.train_std, row.test_mean, row.test_std, row.count);
  }
  if (out.any_failure) {
    std::fprintf(stderr, "warning: some methods failed; see %s\n", out.results_csv_path.c_str());
    return kExitPartialExperiment;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact rank-statistic optimization toolkit"};
  app.require_subcommand(1);

  std::string synth_name, synth_out = "synthetic.csv";
  uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset (flip-1d | gaussians-2d)");
  synth->add_option("name", synth_name, "generator name")->required();
  synth->add_option("--seed", synth_seed, "rng seed");
  synth->add_option("--out", synth_out, "output CSV path");

  std::string eval_data, eval_model, eval_stat = "wrs", eval_mode = "subrank";
  auto* eval = app.add_subcommand("eval", "Evaluate a saved scorer on a dataset");
  eval->add_option("--data", eval_data, "dataset CSV")->required();
  eval->add_option("--weights", eval_model, "model JSON")->required();
  eval->add_option("--stat", eval_stat, "statistic spec (wrs|wta|mrr|dcg|dcg@K|pauc@K|pow:P)");
  eval->add_option("--mode", eval_mode, "rank mode (subrank|resolved-rank|rank-cv)");

  std::string tb_method = "logistic", tb_data, tb_out = "model.json";
  int tb_iters = 500;
  auto* tb = app.add_subcommand("train-base", "Train a surrogate baseline");
  tb->add_option("--method", tb_method, "logistic|exponential|hinge|pnorm-push");
  tb->add_option("--data", tb_data, "dataset CSV")->required();
  tb->add_option("--out", tb_out, "model JSON path");
  tb->add_option("--max-iters", tb_iters, "iteration cap");

  std::string sv_data, sv_form = "subrank", sv_stat = "wrs", sv_trace, sv_lp, sv_model;
  double sv_eps = 1e-4, sv_c = 1e-4, sv_tl = 60.0;
  bool sv_strength = false;
  auto* sv = app.add_subcommand("solve", "Build and solve an exact model on a whole dataset");
  sv->add_option("--data", sv_data, "dataset CSV")->required();
  sv->add_option("--formulation", sv_form, "subrank|resolved-rank|auc");
  sv->add_option("--stat", sv_stat, "statistic spec");
  sv->add_option("--epsilon", sv_eps, "score separation margin");
  sv->add_option("--reg-c", sv_c, "l0 regularization weight");
  sv->add_option("--time-limit", sv_tl, "seconds");
  sv->add_option("--trace-out", sv_trace, "trace CSV path");
  sv->add_option("--export-lp", sv_lp, "write the model in LP text form");
  sv->add_option("--model-out", sv_model, "save the solved scorer as model JSON");
  sv->add_flag("--strengthen", sv_strength, "include the optional strengthening rows (subrank)");

  std::string rr_data, rr_test, rr_base = "logistic", rr_stat = "dcg", rr_form = "subrank", rr_out;
  int rr_k = 50;
  bool rr_full = false;
  double rr_eps = 1e-4, rr_c = 1e-4, rr_tl = 60.0;
  auto* rr = app.add_subcommand("rerank", "Base-rank then exactly rerank the top K");
  rr->add_option("--data", rr_data, "training CSV")->required();
  rr->add_option("--test", rr_test, "optional test CSV");
  rr->add_option("--k", rr_k, "head size");
  rr->add_flag("--full", rr_full, "rerank the full list");
  rr->add_option("--base", rr_base, "base method");
  rr->add_option("--stat", rr_stat, "statistic spec");
  rr->add_option("--formulation", rr_form, "subrank|resolved-rank");
  rr->add_option("--epsilon", rr_eps, "score separation margin");
  rr->add_option("--reg-c", rr_c, "l0 regularization weight");
  rr->add_option("--time-limit", rr_tl, "solver seconds");
  rr->add_option("--out", rr_out, "result JSON path");

  std::string ex_spec;
  auto* ex = app.add_subcommand("experiment", "Run the seeded multi-trial protocol");
  ex->add_option("--spec", ex_spec, "experiment spec JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(synth_name, synth_seed, synth_out);
    if (eval->parsed()) return cmd_eval(eval_data, eval_model, eval_stat, eval_mode);
    if (tb->parsed()) return cmd_train_base(tb_method, tb_data, tb_out, tb_iters);
    if (sv->parsed())
      return cmd_solve(sv_data, sv_form, sv_stat, sv_eps, sv_c, sv_tl, sv_trace, sv_lp, sv_model, sv_strength);
    if (rr->parsed())
      return cmd_rerank(rr_data, rr_test, rr_k, rr_full, rr_base, rr_stat, rr_form, rr_eps, rr_c, rr_tl, rr_out);
    if (ex->parsed()) return cmd_experiment(ex_spec);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return 0;
}
