#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankmip/dataset.hpp"
#include "rankmip/rank_weights.hpp"
#include "rankmip/ranking.hpp"
#include "rankmip/synthetic.hpp"

namespace rankmip {

// Outcome of the tie-breaking perturbation w_hat = w_bar + delta u, with u a
// random unit direction supported on the nonzero coordinates of w_bar and
// delta = eta / 2, eta = min(margin / (2 M sqrt(d)), min_j |w_j|).
struct PerturbationReport {
  LinearScorer original;
  LinearScorer perturbed;
  double eta = 0.0;
  double delta = 0.0;
  double margin = kInf;            // smallest strictly positive score gap
  std::vector<double> direction;   // u
  int ties_before = 0;
  int ties_after = 0;
  bool orderings_preserved = true;
  bool support_preserved = true;

  bool succeeded() const { return ties_after == 0 && orderings_preserved && support_preserved; }

  nlohmann::json to_json() const {
    return {{"original", original.weights},
            {"perturbed", perturbed.weights},
            {"eta", eta},
            {"delta", delta},
            {"margin", std::isfinite(margin) ? margin : -1.0},
            {"direction", direction},
            {"ties_before", ties_before},
            {"ties_after", ties_after},
            {"orderings_preserved", orderings_preserved},
            {"support_preserved", support_preserved},
            {"succeeded", succeeded()}};
  }
};

namespace detail {

inline int count_tied_pairs(const std::vector<double>& s) {
  int ties = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    for (size_t k = i + 1; k < s.size(); ++k) {
      if (s[i] == s[k]) ++ties;
    }
  }
  return ties;
}

}  // namespace detail

// The tie-free perturbation procedure. The direction is restricted to the
// scorer's support, so a tie between rows that differ only outside the
// support cannot be broken; such instances come back with ties_after > 0
// rather than any silent fixup.
inline PerturbationReport perturb_to_tie_free(const Dataset& data, const LinearScorer& scorer,
                                              uint64_t seed) {
  if (scorer.dim() != data.dim()) throw ValidationError("scorer dimension mismatch");
  if (scorer.l0_norm() == 0) throw ValidationError("perturbation needs a nonzero scorer");
  auto dups = data.duplicate_row_pairs();
  if (!dups.empty())
    throw ValidationError("perturbation assumes duplicate-free rows; found " + std::to_string(dups.size()) +
                          " duplicate pair(s)");

  PerturbationReport report;
  report.original = scorer;

  std::vector<int> support;
  for (int j = 0; j < scorer.dim(); ++j) {
    if (std::fabs(scorer.weights[j]) > 1e-12) support.push_back(j);
  }

  Rng rng(seed);
  std::vector<double> v(support.size());
  double norm = 0.0;
  while (norm == 0.0) {
    for (auto& c : v) c = rng.normal();
    norm = 0.0;
    for (double c : v) norm += c * c;
    norm = std::sqrt(norm);
  }
  report.direction.assign(scorer.dim(), 0.0);
  for (size_t a = 0; a < support.size(); ++a) report.direction[support[a]] = v[a] / norm;

  auto s_before = score(data, scorer);
  report.ties_before = detail::count_tied_pairs(s_before);
  for (size_t i = 0; i < s_before.size(); ++i) {
    for (size_t k = 0; k < s_before.size(); ++k) {
      double gap = s_before[i] - s_before[k];
      if (gap > 0.0) report.margin = std::min(report.margin, gap);
    }
  }

  double min_w = kInf;
  for (int j : support) min_w = std::min(min_w, std::fabs(scorer.weights[j]));
  double big_m = data.max_abs_feature();
  double margin_term = kInf;
  if (std::isfinite(report.margin) && big_m > 0.0)
    margin_term = report.margin / (2.0 * big_m * std::sqrt(static_cast<double>(data.dim())));
  report.eta = std::min(margin_term, min_w);
  report.delta = report.eta / 2.0;

  LinearScorer perturbed = scorer;
  for (int j = 0; j < scorer.dim(); ++j) perturbed.weights[j] += report.delta * report.direction[j];
  report.perturbed = perturbed;

  auto s_after = score(data, perturbed);
  report.ties_after = detail::count_tied_pairs(s_after);
  for (size_t i = 0; i < s_before.size(); ++i) {
    for (size_t k = 0; k < s_before.size(); ++k) {
      if (s_before[i] > s_before[k] && !(s_after[i] > s_after[k])) report.orderings_preserved = false;
    }
  }
  report.support_preserved = true;
  for (int j = 0; j < scorer.dim(); ++j) {
    bool was = std::fabs(scorer.weights[j]) > 1e-12;
    bool is = std::fabs(perturbed.weights[j]) > 1e-12;
    if (was != is) report.support_preserved = false;
  }
  return report;
}

// Regularized objectives G_Sub and G_RR for a concrete scorer, and whether
// the subrank value stays below the resolved-rank value (equality holds
// tie-free).
struct Lemma1Result {
  double g_sub = 0.0;
  double g_rr = 0.0;
  bool holds = false;
};

inline Lemma1Result check_lemma1(const Dataset& data, const LinearScorer& scorer,
                                 const RankWeightVector& weights, double reg_c) {
  auto s = score(data, scorer);
  double penalty = reg_c * scorer.l0_norm();
  Lemma1Result r;
  r.g_sub = evaluate_clrs(s, data.labels, weights, RankMode::Subrank) - penalty;
  r.g_rr = evaluate_clrs(s, data.labels, weights, RankMode::ResolvedRank) - penalty;
  r.holds = r.g_sub <= r.g_rr + 1e-12;
  return r;
}

// One statistic's verdict on the two reversed rankings.
struct FlipQuantity {
  std::string name;
  double solution1 = 0.0;
  double solution2 = 0.0;
  bool higher_is_better = true;
  int preferred = 0;  // 1 or 2; 0 when tied

  nlohmann::json to_json() const {
    return {{"name", name},
            {"solution1", solution1},
            {"solution2", solution2},
            {"higher_is_better", higher_is_better},
            {"preferred", preferred}};
  }
};

struct FlipReport {
  uint64_t seed = 0;
  int n = 0;
  int n_positive = 0;
  std::vector<FlipQuantity> quantities;

  const FlipQuantity& find(const std::string& name) const {
    for (const auto& q : quantities) {
      if (q.name == name) return q;
    }
    throw ValidationError("no flip quantity named " + name);
  }

  nlohmann::json to_json() const {
    nlohmann::json q = nlohmann::json::array();
    for (const auto& item : quantities) q.push_back(item.to_json());
    return {{"seed", seed}, {"n", n}, {"n_positive", n_positive}, {"quantities", q}};
  }
};

// Evaluates the eight quantities on the four-clump dataset for the two
// completely reversed rankings (solution 1 scores by +x, solution 2 by -x).
inline FlipReport flip_demonstration(uint64_t seed) {
  Dataset data = generate_flip_1d(seed);
  FlipReport report;
  report.seed = seed;
  report.n = data.n();
  report.n_positive = data.num_positives();

  auto s1 = score(data, LinearScorer({1.0}));
  std::vector<double> s2(s1.size());
  for (size_t i = 0; i < s1.size(); ++i) s2[i] = -s1[i];
  const auto& y = data.labels;
  const int n = data.n();

  auto add_stat = [&](const std::string& name, const RankWeightVector& w) {
    FlipQuantity q;
    q.name = name;
    q.solution1 = evaluate_clrs(s1, y, w, RankMode::Subrank);
    q.solution2 = evaluate_clrs(s2, y, w, RankMode::Subrank);
    q.higher_is_better = true;
    q.preferred = q.solution1 > q.solution2 ? 1 : (q.solution2 > q.solution1 ? 2 : 0);
    report.quantities.push_back(q);
  };
  auto add_loss = [&](const std::string& name, SurrogateKind kind) {
    FlipQuantity q;
    q.name = name;
    q.solution1 = surrogate_loss(s1, y, kind);
    q.solution2 = surrogate_loss(s2, y, kind);
    q.higher_is_better = false;
    q.preferred = q.solution1 < q.solution2 ? 1 : (q.solution2 < q.solution1 ? 2 : 0);
    report.quantities.push_back(q);
  };

  add_stat("wrs_auc", RankWeightVector::wrs(n));
  add_stat("partial_auc@100", RankWeightVector::partial_auc_top(n, 100));
  add_stat("dcg", RankWeightVector::dcg(n));
  add_stat("mrr", RankWeightVector::mrr(n));
  add_loss("hinge_loss", SurrogateKind::HingePairwise);
  add_stat("dcg@100", RankWeightVector::dcg_top(n, 100));
  add_stat("partial_auc@10", RankWeightVector::partial_auc_top(n, 10));
  add_loss("exponential_loss", SurrogateKind::ExponentialPairwise);
  return report;
}

}  // namespace rankmip
