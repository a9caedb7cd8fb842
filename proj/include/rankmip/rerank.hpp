#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "rankmip/baselines.hpp"
#include "rankmip/formulations.hpp"
#include "rankmip/solver.hpp"

namespace rankmip {

enum class RankFormulation { Subrank, ResolvedRank };

inline const char* formulation_name(RankFormulation f) {
  return f == RankFormulation::Subrank ? "subrank" : "resolved-rank";
}

inline RankFormulation parse_formulation(const std::string& s) {
  if (s == "subrank") return RankFormulation::Subrank;
  if (s == "resolved-rank") return RankFormulation::ResolvedRank;
  throw ValidationError("unknown formulation: " + s + " (expected subrank or resolved-rank)");
}

struct RerankConfig {
  int k = 50;              // head size; ignored when full_list
  bool full_list = false;
  WeightSpec statistic;    // materialized per list length (head uses head-local n)
  RankFormulation formulation = RankFormulation::Subrank;
  double epsilon = 1e-4;
  double reg_c = 1e-4;
  bool include_strengthening = false;
  BaseMethod base = BaseMethod::Logistic;
  TrainConfig train;
  SolverConfig solver;

  void validate(int n_train) const {
    if (!full_list && (k < 2 || k > n_train))
      throw ValidationError("head size K must lie in [2, n_train]");
  }
};

struct RerankResult {
  TrainedModel base_model;
  LinearScorer head_scorer;
  double threshold = 0.0;          // base score of the K-th ranked training item
  std::vector<int> head_indices;   // training rows in the head (dataset order)
  MilpSolution solve;
  bool base_epsilon_feasible = false;
  double head_clrs_base = 0.0;     // head-local statistic, formulation's rank mode
  double head_clrs_reranked = 0.0;
  std::map<std::string, double> train_eval_base;
  std::map<std::string, double> train_eval_reranked;
};

struct RankedEvaluation {
  std::vector<int> order;                // item indices, best first
  std::vector<double> synthetic_scores;  // order-faithful tie-free scores per item
  std::map<std::string, double> eval_base;
  std::map<std::string, double> eval_reranked;
};

namespace detail {

inline std::vector<double> base_scores(const Dataset& data, const TrainedModel& base) {
  auto s = score(data, base.scorer);
  for (auto& v : s) v += base.intercept;
  return s;
}

// Merge order: head items by head score, remaining items by base score below
// them. Ties break by base score then dataset index, so the order is total.
inline std::vector<int> merged_order(const std::vector<int>& head, const std::vector<int>& tail,
                                     const std::vector<double>& head_score, const std::vector<double>& base_score) {
  std::vector<int> order = head;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (head_score[a] != head_score[b]) return head_score[a] > head_score[b];
    if (base_score[a] != base_score[b]) return base_score[a] > base_score[b];
    return a < b;
  });
  std::vector<int> rest = tail;
  std::sort(rest.begin(), rest.end(), [&](int a, int b) {
    if (base_score[a] != base_score[b]) return base_score[a] > base_score[b];
    return a < b;
  });
  order.insert(order.end(), rest.begin(), rest.end());
  return order;
}

// Head items get scores in (1, 2] by position, tail items in (0, 1]: the
// merged list becomes a tie-free score vector consumable by evaluate_clrs.
inline std::vector<double> synthetic_scores_for(const std::vector<int>& order, size_t head_size, size_t n) {
  std::vector<double> s(n, 0.0);
  size_t tail_size = n - head_size;
  for (size_t pos = 0; pos < order.size(); ++pos) {
    if (pos < head_size) {
      s[order[pos]] = 2.0 - static_cast<double>(pos) / static_cast<double>(head_size);
    } else {
      size_t q = pos - head_size;
      s[order[pos]] = 1.0 - static_cast<double>(q) / static_cast<double>(tail_size);
    }
  }
  return s;
}

inline std::map<std::string, double> evaluate_list(const std::vector<double>& scores,
                                                   const std::vector<int>& labels, const WeightSpec& spec) {
  std::map<std::string, double> out;
  auto weights = spec.materialize(static_cast<int>(scores.size()));
  out[spec.to_string()] = evaluate_clrs(scores, labels, weights, RankMode::Subrank);
  out["auc"] = auc(scores, labels);
  return out;
}

}  // namespace detail

// Stage one and two on the training set: fit the base ranker, cut the top-K
// head (boundary ties included), solve the exact model on the head only, and
// evaluate base vs merged lists.
inline RerankResult rerank_train(const Dataset& train, const RerankConfig& config) {
  config.validate(train.n());
  RerankResult result;
  result.base_model = train_base(train, config.base, config.train);
  auto scores = detail::base_scores(train, result.base_model);

  const int n = train.n();
  const int k = config.full_list ? n : config.k;
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  result.threshold = sorted[k - 1];
  for (int i = 0; i < n; ++i) {
    if (scores[i] >= result.threshold) result.head_indices.push_back(i);
  }

  Dataset head = train.subset(result.head_indices);
  if (!head.has_both_classes())
    throw ValidationError("top-" + std::to_string(k) + " head is single-class; reranking it cannot help");

  FormulationConfig fc;
  fc.epsilon = config.epsilon;
  fc.reg_c = config.reg_c;
  fc.include_strengthening = config.include_strengthening;
  fc.weights = config.statistic.materialize(head.n());

  MilpModel model = config.formulation == RankFormulation::Subrank ? build_subrank(head, fc)
                                                                   : build_resolved_rank(head, fc);
  model.head_k = k;
  result.solve = solve_milp(model, config.solver, make_rank_completion(model, head));
  if (result.solve.status == MilpSolution::Status::Infeasible ||
      result.solve.status == MilpSolution::Status::Unbounded || result.solve.values.empty()) {
    throw SolverError(std::string("head model came back ") + MilpSolution::status_name(result.solve.status) +
                      "; model dump:\n" + model.to_lp_text());
  }

  std::vector<double> w(head.dim());
  for (int j = 0; j < head.dim(); ++j) w[j] = result.solve.values[model.find_variable(detail::idx1("w", j))];
  result.head_scorer = LinearScorer(w);

  result.base_epsilon_feasible = check_epsilon_feasible(head, result.base_model.scorer, config.epsilon).feasible;

  // head-local statistic before/after, in the formulation's rank mode
  RankMode mode = config.formulation == RankFormulation::Subrank ? RankMode::Subrank : RankMode::ResolvedRank;
  std::vector<double> head_base(head.n()), head_new(head.n());
  for (int i = 0; i < head.n(); ++i) {
    head_base[i] = scores[result.head_indices[i]];
    head_new[i] = result.head_scorer.score_row(head.features.row(i));
  }
  result.head_clrs_base = evaluate_clrs(head_base, head.labels, fc.weights, mode);
  result.head_clrs_reranked = evaluate_clrs(head_new, head.labels, fc.weights, mode);

  // whole-training-list evaluations
  std::vector<int> tail;
  {
    std::vector<char> in_head(n, 0);
    for (int i : result.head_indices) in_head[i] = 1;
    for (int i = 0; i < n; ++i) {
      if (!in_head[i]) tail.push_back(i);
    }
  }
  std::vector<double> head_score_full(n, 0.0);
  for (int i : result.head_indices) head_score_full[i] = 0.0;
  for (size_t a = 0; a < result.head_indices.size(); ++a)
    head_score_full[result.head_indices[a]] = head_new[a];
  auto order = detail::merged_order(result.head_indices, tail, head_score_full, scores);
  auto merged = detail::synthetic_scores_for(order, result.head_indices.size(), n);
  result.train_eval_base = detail::evaluate_list(scores, train.labels, config.statistic);
  result.train_eval_reranked = detail::evaluate_list(merged, train.labels, config.statistic);
  return result;
}

// Apply a trained rerank to a test set: items scoring strictly above the
// training threshold form the head block (ordered by the head scorer), the
// rest follow in base order.
inline RankedEvaluation rerank_apply(const Dataset& test, const RerankResult& result,
                                     const RerankConfig& config) {
  if (test.dim() != result.base_model.scorer.dim()) throw ValidationError("test dimension mismatch");
  auto scores = detail::base_scores(test, result.base_model);
  const int n = test.n();

  std::vector<int> head, tail;
  for (int i = 0; i < n; ++i) {
    (scores[i] > result.threshold ? head : tail).push_back(i);
  }
  std::vector<double> head_score(n, 0.0);
  for (int i : head) head_score[i] = result.head_scorer.score_row(test.features.row(i));

  RankedEvaluation out;
  out.order = detail::merged_order(head, tail, head_score, scores);
  out.synthetic_scores = detail::synthetic_scores_for(out.order, head.size(), n);
  out.eval_base = detail::evaluate_list(scores, test.labels, config.statistic);
  out.eval_reranked = detail::evaluate_list(out.synthetic_scores, test.labels, config.statistic);
  return out;
}

}  // namespace rankmip
