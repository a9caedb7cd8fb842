#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rankmip/dataset.hpp"
#include "rankmip/rank_weights.hpp"

namespace rankmip {

// The three rank definitions. Ties are detected by exact score equality;
// epsilon separation of scores is the MIP's job, not the evaluator's.
//
//   Subrank(i)      = #{k : s_k < s_i},  range [0, n-1], ties share values
//   RankCv(i)       = #{k : s_k <= s_i}, range [1, n],   ties counted as correct
//   ResolvedRank(i) = permutation of {0..n-1}; within a tie group negatives
//                     rank above positives and same-label ties break by
//                     dataset index (smaller index higher)
enum class RankMode { Subrank, ResolvedRank, RankCv };

struct RankAssignment {
  RankMode mode;
  std::vector<int> ranks;
};

inline std::vector<double> score(const Dataset& data, const LinearScorer& scorer) {
  if (scorer.dim() != data.dim())
    throw ValidationError("scorer dimension " + std::to_string(scorer.dim()) +
                          " != dataset dimension " + std::to_string(data.dim()));
  std::vector<double> s(data.n());
  for (int i = 0; i < data.n(); ++i) s[i] = scorer.score_row(data.features.row(i));
  return s;
}

inline void check_scores_finite(const std::vector<double>& scores) {
  for (double v : scores) {
    if (!std::isfinite(v)) throw ValidationError("non-finite score");
  }
}

inline RankAssignment assign_ranks(const std::vector<double>& scores, const std::vector<int>& labels,
                                   RankMode mode) {
  check_scores_finite(scores);
  const int n = static_cast<int>(scores.size());
  if (static_cast<int>(labels.size()) != n) throw ValidationError("labels length != scores length");
  RankAssignment out;
  out.mode = mode;
  out.ranks.assign(n, 0);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  if (mode == RankMode::ResolvedRank) {
    // Descending resolved order: higher score first; within a tie, negatives
    // first (they get the higher rank), then smaller dataset index first.
    std::sort(order.begin(), order.end(), [&](int i, int k) {
      if (scores[i] != scores[k]) return scores[i] > scores[k];
      if (labels[i] != labels[k]) return labels[i] < labels[k];
      return i < k;
    });
    for (int pos = 0; pos < n; ++pos) out.ranks[order[pos]] = n - 1 - pos;
    return out;
  }

  // Subrank / RankCv via one ascending sort with tie groups.
  std::sort(order.begin(), order.end(), [&](int i, int k) {
    if (scores[i] != scores[k]) return scores[i] < scores[k];
    return i < k;
  });
  int g = 0;
  while (g < n) {
    int h = g;
    while (h + 1 < n && scores[order[h + 1]] == scores[order[g]]) ++h;
    // group occupies ascending positions [g, h]
    for (int pos = g; pos <= h; ++pos) {
      out.ranks[order[pos]] = (mode == RankMode::Subrank) ? g : h + 1;
    }
    g = h + 1;
  }
  return out;
}

// CLRS(f) = sum over positives of the weight at that observation's rank.
// Subrank and ResolvedRank index a_{rank+1}; RankCv indexes a_{rank} directly.
inline double evaluate_clrs(const std::vector<double>& scores, const std::vector<int>& labels,
                            const RankWeightVector& weights, RankMode mode) {
  const int n = static_cast<int>(scores.size());
  if (weights.n() != n)
    throw ValidationError("weight vector length " + std::to_string(weights.n()) +
                          " != list length " + std::to_string(n));
  RankAssignment ranks = assign_ranks(scores, labels, mode);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (labels[i] != 1) continue;
    int l = (mode == RankMode::RankCv) ? ranks.ranks[i] : ranks.ranks[i] + 1;
    total += weights.value_at(l);
  }
  return total;
}

namespace detail {

struct ClassCounts {
  long long n_pos = 0;
  long long n_neg = 0;
};

inline ClassCounts require_both_classes(const std::vector<int>& labels) {
  ClassCounts c;
  for (int y : labels) (y == 1 ? c.n_pos : c.n_neg)++;
  if (c.n_pos == 0 || c.n_neg == 0) throw ValidationError("need at least one positive and one negative");
  return c;
}

// #{(i in S+, k in S-) : s_k < s_i}, counted by an ascending sweep.
inline long long correctly_ranked_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  const int n = static_cast<int>(scores.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int k) { return scores[i] < scores[k]; });
  long long count = 0;
  long long negs_below = 0;
  int g = 0;
  while (g < n) {
    int h = g;
    long long group_pos = 0, group_neg = 0;
    while (h < n && scores[order[h]] == scores[order[g]]) {
      (labels[order[h]] == 1 ? group_pos : group_neg)++;
      ++h;
    }
    count += group_pos * negs_below;  // ties within the group earn nothing
    negs_below += group_neg;
    g = h;
  }
  return count;
}

}  // namespace detail

// Fraction of correctly ranked positive-negative pairs; a tie counts as a misrank.
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_scores_finite(scores);
  auto c = detail::require_both_classes(labels);
  long long good = detail::correctly_ranked_pairs(scores, labels);
  return static_cast<double>(good) / static_cast<double>(c.n_pos * c.n_neg);
}

inline double pairwise_misranking_error(const std::vector<double>& scores, const std::vector<int>& labels) {
  return 1.0 - auc(scores, labels);
}

// Wilcoxon rank sum: sum of RankCv over positives, minus the number of tied
// pairs within the positive class (the tie adjustment). Tie-free this equals
// n+ n- AUC + n+(n+ + 1)/2.
inline double wrs(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_scores_finite(scores);
  RankAssignment cv = assign_ranks(scores, labels, RankMode::RankCv);
  const int n = static_cast<int>(scores.size());
  long long total = 0;
  for (int i = 0; i < n; ++i) {
    if (labels[i] == 1) total += cv.ranks[i];
  }
  // tied positive pairs
  std::vector<double> pos_scores;
  for (int i = 0; i < n; ++i) {
    if (labels[i] == 1) pos_scores.push_back(scores[i]);
  }
  std::sort(pos_scores.begin(), pos_scores.end());
  long long tied = 0;
  size_t g = 0;
  while (g < pos_scores.size()) {
    size_t h = g;
    while (h + 1 < pos_scores.size() && pos_scores[h + 1] == pos_scores[g]) ++h;
    long long m = static_cast<long long>(h - g + 1);
    tied += m * (m - 1) / 2;
    g = h + 1;
  }
  return static_cast<double>(total - tied);
}

enum class SurrogateKind { ExponentialPairwise, HingePairwise, Logistic };

// The three convex stand-ins. Pairwise kinds need both classes; regularizers
// live in the trainers, not here.
inline double surrogate_loss(const std::vector<double>& scores, const std::vector<int>& labels,
                             SurrogateKind kind) {
  check_scores_finite(scores);
  const int n = static_cast<int>(scores.size());
  if (kind == SurrogateKind::Logistic) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double y = labels[i] == 1 ? 1.0 : -1.0;
      total += log1p_exp(-y * scores[i]);
    }
    return total;
  }
  detail::require_both_classes(labels);
  double total = 0.0;
  if (kind == SurrogateKind::ExponentialPairwise) {
    // sum_{i+,k-} e^{-(s_i - s_k)} = (sum_+ e^{-s_i})(sum_- e^{s_k}), guarded
    // against overflow by shifting both factors by the score midrange.
    double smin = *std::min_element(scores.begin(), scores.end());
    double smax = *std::max_element(scores.begin(), scores.end());
    double mid = 0.5 * (smin + smax);
    double pos_sum = 0.0, neg_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (labels[i] == 1) pos_sum += exp_guarded(-(scores[i] - mid));
      else neg_sum += exp_guarded(scores[i] - mid);
    }
    return pos_sum * neg_sum;
  }
  for (int i = 0; i < n; ++i) {
    if (labels[i] != 1) continue;
    for (int k = 0; k < n; ++k) {
      if (labels[k] != 0) continue;
      total += std::max(0.0, 1.0 - (scores[i] - scores[k]));
    }
  }
  return total;
}

}  // namespace rankmip
