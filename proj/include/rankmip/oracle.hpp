#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "rankmip/dataset.hpp"
#include "rankmip/rank_weights.hpp"
#include "rankmip/ranking.hpp"

namespace rankmip {

struct OracleResult {
  double best_objective = -kInf;
  LinearScorer best_scorer;
  long cells_evaluated = 0;
};

// Exhaustive optimizer over linear scorers supported on at most two features.
// A linear scorer in a 2-D feature subspace can induce only finitely many
// orderings: the candidate directions are one interior point per angular cell
// of the arrangement cut by the critical directions w'(x_i - x_k) = 0. Every
// candidate (plus the zero scorer and the single-feature sign pairs) is
// evaluated exactly, so the result certifies desk-scale optima.
//
// `objective` maps a score vector to the statistic value; the l0 penalty
// reg_c * ||w||_0 is subtracted here.
inline OracleResult oracle_optimize_general(const Dataset& data,
                                            const std::function<double(const std::vector<double>&)>& objective,
                                            double reg_c) {
  if (data.dim() > 3) throw ValidationError("oracle handles d <= 3 only");
  if (data.n() > 60) throw ValidationError("oracle handles n <= 60 only");

  OracleResult result;
  auto consider = [&](const std::vector<double>& w) {
    LinearScorer scorer(w);
    auto s = score(data, scorer);
    double value = objective(s) - reg_c * scorer.l0_norm();
    ++result.cells_evaluated;
    if (value > result.best_objective + 1e-12) {
      result.best_objective = value;
      result.best_scorer = scorer;
    }
  };

  const int d = data.dim();
  const int n = data.n();

  consider(std::vector<double>(d, 0.0));  // empty support

  for (int j = 0; j < d; ++j) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> w(d, 0.0);
      w[j] = sign;
      consider(w);
    }
  }

  for (int j1 = 0; j1 < d; ++j1) {
    for (int j2 = j1 + 1; j2 < d; ++j2) {
      std::vector<double> angles;
      for (int i = 0; i < n; ++i) {
        for (int k = i + 1; k < n; ++k) {
          double d1 = data.features.at(i, j1) - data.features.at(k, j1);
          double d2 = data.features.at(i, j2) - data.features.at(k, j2);
          if (d1 == 0.0 && d2 == 0.0) continue;  // tied in this subspace for every w
          double phi = std::atan2(-d1, d2);  // direction orthogonal to (d1, d2)
          for (double cand : {phi, phi + M_PI}) {
            double a = std::fmod(cand, 2.0 * M_PI);
            if (a < 0.0) a += 2.0 * M_PI;
            angles.push_back(a);
          }
        }
      }
      std::sort(angles.begin(), angles.end());
      angles.erase(std::unique(angles.begin(), angles.end(),
                               [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
                   angles.end());
      std::vector<double> candidates;
      if (angles.empty()) {
        candidates.push_back(0.0);
      } else {
        for (size_t a = 0; a + 1 < angles.size(); ++a) candidates.push_back(0.5 * (angles[a] + angles[a + 1]));
        candidates.push_back(std::fmod(0.5 * (angles.back() + angles.front() + 2.0 * M_PI), 2.0 * M_PI));
      }
      for (double phi : candidates) {
        std::vector<double> w(d, 0.0);
        w[j1] = std::cos(phi);
        w[j2] = std::sin(phi);
        consider(w);
      }
    }
  }
  return result;
}

// Maximize CLRS with ResolvedRanks (equivalently Subranks in tie-free cell
// interiors) minus reg_c * ||w||_0.
inline OracleResult oracle_optimize(const Dataset& data, const RankWeightVector& weights, double reg_c) {
  if (weights.n() != data.n()) throw ValidationError("weight vector length must equal dataset size");
  auto labels = data.labels;
  return oracle_optimize_general(
      data, [&, labels](const std::vector<double>& s) { return evaluate_clrs(s, labels, weights, RankMode::ResolvedRank); },
      reg_c);
}

// Best achievable AUC (fraction of strictly separated positive-negative pairs).
inline OracleResult oracle_best_auc(const Dataset& data) {
  auto labels = data.labels;
  return oracle_optimize_general(
      data, [&, labels](const std::vector<double>& s) { return auc(s, labels); }, 0.0);
}

}  // namespace rankmip
