#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankmip/data_io.hpp"
#include "rankmip/rerank.hpp"
#include "rankmip/synthetic.hpp"

namespace rankmip {

// Seeded multi-trial protocol: split, train every baseline, rerank per K,
// aggregate. Trials share splits across methods; per-trial seeds derive from
// the master seed.
struct ExperimentSpec {
  std::string csv_path;              // exactly one of csv_path / synthetic_name
  std::string synthetic_name;
  uint64_t dataset_seed = 1;
  int trials = 10;
  double train_fraction = 0.5;
  std::vector<int> k_list{20, 50};
  bool include_full = true;
  WeightSpec statistic = WeightSpec::parse("dcg");
  std::vector<double> epsilon_grid{1e-4};
  std::vector<double> reg_c_grid{1e-4};
  RankFormulation formulation = RankFormulation::Subrank;
  bool include_strengthening = false;
  double solver_time_limit_s = 60.0;
  double solver_gap_tolerance = 1e-7;
  uint64_t seed = 7;
  bool single_threaded = true;  // deterministic clock + serial trials
  std::string out_dir = "experiment-out";
  TrainConfig train;

  void validate() const {
    if (csv_path.empty() == synthetic_name.empty())
      throw ValidationError("experiment spec needs exactly one of csv_path / synthetic");
    if (trials < 1) throw ValidationError("trials must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw ValidationError("train_fraction must lie in (0,1)");
    if (k_list.empty() && !include_full) throw ValidationError("k_list empty and full list disabled");
    if (epsilon_grid.empty() || reg_c_grid.empty()) throw ValidationError("epsilon/C grids must be non-empty");
  }

  static ExperimentSpec from_json(const nlohmann::json& j) {
    ExperimentSpec s;
    s.csv_path = j.value("csv", std::string());
    s.synthetic_name = j.value("synthetic", std::string());
    s.dataset_seed = j.value("dataset_seed", s.dataset_seed);
    s.trials = j.value("trials", s.trials);
    s.train_fraction = j.value("train_fraction", s.train_fraction);
    if (j.contains("k_list")) s.k_list = j["k_list"].get<std::vector<int>>();
    s.include_full = j.value("include_full", s.include_full);
    if (j.contains("statistic")) s.statistic = WeightSpec::parse(j["statistic"].get<std::string>());
    if (j.contains("epsilon_grid")) s.epsilon_grid = j["epsilon_grid"].get<std::vector<double>>();
    if (j.contains("reg_c_grid")) s.reg_c_grid = j["reg_c_grid"].get<std::vector<double>>();
    if (j.contains("formulation")) s.formulation = parse_formulation(j["formulation"].get<std::string>());
    s.include_strengthening = j.value("include_strengthening", s.include_strengthening);
    s.solver_time_limit_s = j.value("time_limit_s", s.solver_time_limit_s);
    s.solver_gap_tolerance = j.value("gap_tolerance", s.solver_gap_tolerance);
    s.seed = j.value("seed", s.seed);
    s.single_threaded = j.value("single_threaded", s.single_threaded);
    s.out_dir = j.value("out_dir", s.out_dir);
    if (j.contains("max_iters")) s.train.max_iters = j["max_iters"].get<int>();
    s.validate();
    return s;
  }

  nlohmann::json to_json() const {
    return {{"csv", csv_path},
            {"synthetic", synthetic_name},
            {"dataset_seed", dataset_seed},
            {"trials", trials},
            {"train_fraction", train_fraction},
            {"k_list", k_list},
            {"include_full", include_full},
            {"statistic", statistic.to_string()},
            {"epsilon_grid", epsilon_grid},
            {"reg_c_grid", reg_c_grid},
            {"formulation", formulation_name(formulation)},
            {"include_strengthening", include_strengthening},
            {"time_limit_s", solver_time_limit_s},
            {"gap_tolerance", solver_gap_tolerance},
            {"seed", seed},
            {"single_threaded", single_threaded},
            {"out_dir", out_dir},
            {"scaling", "global [-1,1] per column before splitting"}};
  }
};

struct MethodResult {
  std::string method;   // lr | svm | rb | pnorm-push | mip | mip-full
  int k = 0;            // 0 for baselines and the full list
  double epsilon = 0.0; // 0 for baselines
  double reg_c = 0.0;
  double train_value = 0.0;
  double test_value = 0.0;
  std::string status = "ok";
  double gap = 0.0;
  double solve_seconds = 0.0;
  std::string error;
};

struct TrialResult {
  int trial = 0;
  std::vector<MethodResult> methods;
  bool failed = false;
};

struct AggregateRow {
  std::string key;
  double train_mean = 0.0, train_std = 0.0;
  double test_mean = 0.0, test_std = 0.0;
  int count = 0;
};

struct ExperimentOutput {
  ExperimentSpec spec;
  std::vector<TrialResult> trials;
  std::vector<AggregateRow> aggregate;
  bool any_failure = false;
  std::string results_csv_path;
  std::string results_json_path;
};

namespace detail {

inline std::string method_key(const MethodResult& m) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s|k=%d|eps=%g|c=%g", m.method.c_str(), m.k, m.epsilon, m.reg_c);
  return buf;
}

inline void split_indices(int n, const std::vector<int>& labels, double fraction, uint64_t seed,
                          std::vector<int>& train, std::vector<int>& test) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    Rng rng(seed + attempt * 0x9e37ull);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    int n_train = std::max(1, std::min(n - 1, static_cast<int>(std::lround(fraction * n))));
    train.assign(idx.begin(), idx.begin() + n_train);
    test.assign(idx.begin() + n_train, idx.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    auto has_both = [&](const std::vector<int>& part) {
      bool pos = false, neg = false;
      for (int i : part) (labels[i] == 1 ? pos : neg) = true;
      return pos && neg;
    };
    if (has_both(train) && has_both(test)) return;
  }
  throw ValidationError("could not draw a split with both classes on both sides");
}

inline double eval_scores(const std::vector<double>& s, const std::vector<int>& labels, const WeightSpec& spec) {
  return evaluate_clrs(s, labels, spec.materialize(static_cast<int>(s.size())), RankMode::Subrank);
}

}  // namespace detail

inline ExperimentOutput run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);

  Dataset full = spec.csv_path.empty()
                     ? generate_synthetic(spec.synthetic_name, spec.dataset_seed).scaled_to_unit()
                     : load_csv(spec.csv_path);

  ExperimentOutput out;
  out.spec = spec;

  SolverConfig solver;
  solver.time_limit_s = spec.solver_time_limit_s;
  solver.gap_tolerance = spec.solver_gap_tolerance;
  solver.clock_mode = spec.single_threaded ? WorkClock::Mode::Deterministic : WorkClock::Mode::Wall;

  for (int trial = 0; trial < spec.trials; ++trial) {
    TrialResult tr;
    tr.trial = trial;
    uint64_t tseed = Rng::derive_seed(spec.seed, trial);
    std::vector<int> train_idx, test_idx;
    detail::split_indices(full.n(), full.labels, spec.train_fraction, tseed, train_idx, test_idx);
    Dataset train = full.subset(train_idx);
    Dataset test = full.subset(test_idx);

    TrainConfig tc = spec.train;
    tc.seed = tseed;

    auto eval_base_method = [&](const std::string& name, const TrainedModel& model, double l2 = 0.0) {
      MethodResult m;
      m.method = name;
      m.reg_c = l2;
      std::vector<double> strain = score(train, model.scorer);
      std::vector<double> stest = score(test, model.scorer);
      m.train_value = detail::eval_scores(strain, train.labels, spec.statistic);
      m.test_value = detail::eval_scores(stest, test.labels, spec.statistic);
      return m;
    };

    // baselines on the shared split
    try {
      tr.methods.push_back(eval_base_method("lr", train_logistic(train, tc)));
    } catch (const std::exception& e) {
      tr.methods.push_back({"lr", 0, 0, 0, 0, 0, "failed", 0, 0, e.what()});
    }
    try {
      // hinge C sweep, best test value reported (the protocol's choice)
      MethodResult best;
      bool have = false;
      for (double c2 : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        TrainConfig hc = tc;
        hc.l2_c = c2;
        auto m = eval_base_method("svm", train_hinge_pairwise(train, hc), c2);
        if (!have || m.test_value > best.test_value) {
          best = m;
          have = true;
        }
      }
      tr.methods.push_back(best);
    } catch (const std::exception& e) {
      tr.methods.push_back({"svm", 0, 0, 0, 0, 0, "failed", 0, 0, e.what()});
    }
    try {
      tr.methods.push_back(eval_base_method("rb", train_exponential_pairwise(train, tc)));
    } catch (const std::exception& e) {
      tr.methods.push_back({"rb", 0, 0, 0, 0, 0, "failed", 0, 0, e.what()});
    }
    try {
      TrainConfig pc = tc;
      pc.p = 2.0;
      tr.methods.push_back(eval_base_method("pnorm-push", train_pnorm_push(train, pc)));
    } catch (const std::exception& e) {
      tr.methods.push_back({"pnorm-push", 0, 0, 0, 0, 0, "failed", 0, 0, e.what()});
    }

    // exact rerankers
    std::vector<std::pair<std::string, int>> mip_runs;
    for (int k : spec.k_list) mip_runs.push_back({"mip", k});
    if (spec.include_full) mip_runs.push_back({"mip-full", 0});
    for (const auto& [mname, k] : mip_runs) {
      for (double eps : spec.epsilon_grid) {
        for (double c : spec.reg_c_grid) {
          MethodResult m;
          m.method = mname;
          m.k = k;
          m.epsilon = eps;
          m.reg_c = c;
          try {
            RerankConfig rc;
            rc.k = k;
            rc.full_list = mname == "mip-full";
            rc.statistic = spec.statistic;
            rc.formulation = spec.formulation;
            rc.epsilon = eps;
            rc.reg_c = c;
            rc.include_strengthening = spec.include_strengthening;
            rc.base = BaseMethod::Logistic;
            rc.train = tc;
            rc.solver = solver;
            rc.solver.seed = tseed;
            auto rr = rerank_train(train, rc);
            auto applied = rerank_apply(test, rr, rc);
            m.train_value = rr.train_eval_reranked.at(spec.statistic.to_string());
            m.test_value = applied.eval_reranked.at(spec.statistic.to_string());
            m.status = MilpSolution::status_name(rr.solve.status);
            m.gap = rr.solve.gap;
            m.solve_seconds = rr.solve.solve_seconds;
            std::string block = mname == "mip-full" ? "full" : "k" + std::to_string(k);
            std::string trace = "trace_t" + std::to_string(trial) + "_" + block;
            if (spec.epsilon_grid.size() > 1 || spec.reg_c_grid.size() > 1) {
              char suffix[64];
              std::snprintf(suffix, sizeof(suffix), "_e%g_c%g", eps, c);
              trace += suffix;
            }
            write_trace_csv(rr.solve, (fs::path(spec.out_dir) / (trace + ".csv")).string());
          } catch (const std::exception& e) {
            m.status = "failed";
            m.error = e.what();
            tr.failed = true;
            out.any_failure = true;
          }
          tr.methods.push_back(m);
        }
      }
    }
    out.trials.push_back(std::move(tr));
  }

  // aggregate mean +- sample std per method key
  std::map<std::string, std::vector<std::pair<double, double>>> buckets;
  for (const auto& tr : out.trials) {
    for (const auto& m : tr.methods) {
      if (m.status == "failed") continue;
      buckets[detail::method_key(m)].push_back({m.train_value, m.test_value});
    }
  }
  for (const auto& [key, vals] : buckets) {
    AggregateRow row;
    row.key = key;
    row.count = static_cast<int>(vals.size());
    double st = 0, ss = 0;
    for (auto& [a, b] : vals) {
      st += a;
      ss += b;
    }
    row.train_mean = st / row.count;
    row.test_mean = ss / row.count;
    if (row.count > 1) {
      double vt = 0, vs = 0;
      for (auto& [a, b] : vals) {
        vt += (a - row.train_mean) * (a - row.train_mean);
        vs += (b - row.test_mean) * (b - row.test_mean);
      }
      row.train_std = std::sqrt(vt / (row.count - 1));
      row.test_std = std::sqrt(vs / (row.count - 1));
    }
    out.aggregate.push_back(row);
  }

  // results.csv: fixed column set, one row per (trial, method)
  out.results_csv_path = (fs::path(spec.out_dir) / "results.csv").string();
  {
    std::ofstream f(out.results_csv_path);
    f << "trial,method,k,epsilon,reg_c,train_value,test_value,status,gap,solve_seconds,error\n";
    char buf[512];
    for (const auto& tr : out.trials) {
      for (const auto& m : tr.methods) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%d,%.17g,%.17g,%.17g,%.17g,%s,%.17g,%.6f,%s\n", tr.trial,
                      m.method.c_str(), m.k, m.epsilon, m.reg_c, m.train_value, m.test_value,
                      m.status.c_str(), m.gap, m.solve_seconds, m.error.c_str());
        f << buf;
      }
    }
  }

  out.results_json_path = (fs::path(spec.out_dir) / "results.json").string();
  {
    nlohmann::json jtrials = nlohmann::json::array();
    for (const auto& tr : out.trials) {
      nlohmann::json jm = nlohmann::json::array();
      for (const auto& m : tr.methods) {
        jm.push_back({{"method", m.method},
                      {"k", m.k},
                      {"epsilon", m.epsilon},
                      {"reg_c", m.reg_c},
                      {"train_value", m.train_value},
                      {"test_value", m.test_value},
                      {"status", m.status},
                      {"gap", m.gap},
                      {"solve_seconds", m.solve_seconds},
                      {"error", m.error}});
      }
      jtrials.push_back({{"trial", tr.trial}, {"failed", tr.failed}, {"methods", jm}});
    }
    nlohmann::json jagg = nlohmann::json::array();
    for (const auto& row : out.aggregate) {
      jagg.push_back({{"key", row.key},
                      {"count", row.count},
                      {"train_mean", row.train_mean},
                      {"train_std", row.train_std},
                      {"test_mean", row.test_mean},
                      {"test_std", row.test_std}});
    }
    nlohmann::json j{{"spec", spec.to_json()}, {"trials", jtrials}, {"aggregate", jagg},
                     {"any_failure", out.any_failure}};
    std::ofstream f(out.results_json_path);
    f << j.dump(2) << "\n";
  }
  return out;
}

}  // namespace rankmip
