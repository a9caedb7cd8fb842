#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rankmip/dataset.hpp"
#include "rankmip/milp.hpp"
#include "rankmip/rank_weights.hpp"
#include "rankmip/ranking.hpp"

namespace rankmip {

// Shared knobs for the MIP builders. epsilon is the score-separation margin;
// reg_c the per-nonzero-weight penalty.
struct FormulationConfig {
  double epsilon = 1e-4;
  double reg_c = 1e-4;
  RankWeightVector weights;
  bool include_strengthening = false;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
    if (reg_c < 0.0) throw ValidationError("reg_c must be non-negative");
  }
};

// Sparse pairwise preferences pi_ik = 1 meaning i should rank above k.
// Contradictions and self-pairs are rejected on insertion.
class PreferenceMatrix {
 public:
  explicit PreferenceMatrix(int n) : n_(n) {
    if (n < 2) throw ValidationError("preference matrix needs at least 2 items");
  }

  void add(int i, int k) {
    if (i < 0 || k < 0 || i >= n_ || k >= n_) throw ValidationError("preference index out of range");
    if (i == k) throw ValidationError("self-preference pi_ii is not allowed");
    if (pairs_.count({k, i})) throw ValidationError("contradictory preference: both (" + std::to_string(i) +
                                                    "," + std::to_string(k) + ") and its reverse");
    pairs_.insert({i, k});
  }

  int n() const { return n_; }
  bool empty() const { return pairs_.empty(); }
  const std::set<std::pair<int, int>>& pairs() const { return pairs_; }

  // Two-class labels become the bipartite preference "each positive above
  // each negative" (the AUC objective).
  static PreferenceMatrix bipartite(const std::vector<int>& labels) {
    PreferenceMatrix pm(static_cast<int>(labels.size()));
    for (int i = 0; i < pm.n(); ++i) {
      if (labels[i] != 1) continue;
      for (int k = 0; k < pm.n(); ++k) {
        if (labels[k] == 0) pm.add(i, k);
      }
    }
    return pm;
  }

  // Ordinal classes: every member of a higher class is preferred over every
  // member of a strictly lower class.
  static PreferenceMatrix multipartite(const std::vector<int>& classes) {
    PreferenceMatrix pm(static_cast<int>(classes.size()));
    for (int i = 0; i < pm.n(); ++i) {
      for (int k = 0; k < pm.n(); ++k) {
        if (classes[i] > classes[k]) pm.add(i, k);
      }
    }
    return pm;
  }

 private:
  int n_;
  std::set<std::pair<int, int>> pairs_;
};

namespace detail {

inline std::string idx2(const std::string& base, int i, int k) {
  return base + "[" + std::to_string(i) + "][" + std::to_string(k) + "]";
}
inline std::string idx1(const std::string& base, int i) {
  return base + "[" + std::to_string(i) + "]";
}

struct WGamma {
  std::vector<int> w;
  std::vector<int> gamma;
};

inline WGamma add_scorer_variables(MilpModel& m, int d, double reg_c) {
  WGamma wg;
  for (int j = 0; j < d; ++j) wg.w.push_back(m.add_variable(idx1("w", j), VarKind::Continuous, -1.0, 1.0));
  for (int j = 0; j < d; ++j) wg.gamma.push_back(m.add_variable(idx1("gamma", j), VarKind::Binary, 0.0, 1.0));
  for (int j = 0; j < d; ++j) {
    m.add_constraint(idx1("gamma_pos", j), {{wg.gamma[j], 1.0}, {wg.w[j], -1.0}}, RowSense::GreaterEqual, 0.0);
    m.add_constraint(idx1("gamma_neg", j), {{wg.gamma[j], 1.0}, {wg.w[j], 1.0}}, RowSense::GreaterEqual, 0.0);
    m.add_objective_term(wg.gamma[j], -reg_c);
  }
  return wg;
}

// z_ik <= w'(x_i - x_k) + 1 - eps
inline void add_separation_upper(MilpModel& m, const Dataset& data, const WGamma& wg, int z_var, int i, int k,
                                 double epsilon) {
  std::vector<LinearTerm> terms{{z_var, 1.0}};
  for (int j = 0; j < data.dim(); ++j) {
    double delta = data.features.at(i, j) - data.features.at(k, j);
    if (delta != 0.0) terms.push_back({wg.w[j], -delta});
  }
  m.add_constraint(idx2("sep_ub", i, k), std::move(terms), RowSense::LessEqual, 1.0 - epsilon);
}

// z_ik >= w'(x_i - x_k)
inline void add_separation_lower(MilpModel& m, const Dataset& data, const WGamma& wg, int z_var, int i, int k) {
  std::vector<LinearTerm> terms{{z_var, 1.0}};
  for (int j = 0; j < data.dim(); ++j) {
    double delta = data.features.at(i, j) - data.features.at(k, j);
    if (delta != 0.0) terms.push_back({wg.w[j], -delta});
  }
  m.add_constraint(idx2("sep_lb", i, k), std::move(terms), RowSense::GreaterEqual, 0.0);
}

inline void check_clrs_preconditions(const Dataset& data, const FormulationConfig& config) {
  config.validate();
  if (data.n() < 2) throw ValidationError("need at least 2 observations");
  if (!data.has_both_classes()) throw ValidationError("single-class dataset: CLRS optimization is vacuous");
  if (config.weights.n() != data.n())
    throw ValidationError("weight vector length must equal dataset size");
  if (config.weights.support().empty())
    throw ValidationError("rank weights are constant (empty support): the statistic cannot be optimized");
}

inline void note_duplicates(MilpModel& m, const Dataset& data) {
  auto dups = data.duplicate_row_pairs();
  if (dups.empty()) return;
  std::string msg = "duplicate feature rows (subrank/resolved-rank equivalence assumes none):";
  for (auto& [a, b] : dups) msg += " (" + std::to_string(a) + "," + std::to_string(b) + ")";
  m.build_warnings.push_back(msg);
}

}  // namespace detail

// Formulation that maximizes the regularized CLRS over ResolvedRanks:
// objective sum a~_l t_il - C sum gamma_j with the score separation rows,
// the tie-resolution rows coupling the integer ranks r_i, and the t
// definition rows. The constant |S+| a_1 is recorded as the offset.
inline MilpModel build_resolved_rank(const Dataset& data, const FormulationConfig& config) {
  detail::check_clrs_preconditions(data, config);
  const int n = data.n();
  const auto& wv = config.weights;

  MilpModel m;
  m.formulation = "resolved-rank";
  m.epsilon = config.epsilon;
  m.reg_c = config.reg_c;
  detail::note_duplicates(m, data);

  auto wg = detail::add_scorer_variables(m, data.dim(), config.reg_c);

  // z for every ordered pair i != k (the diagonal would be identically zero).
  Matrix z_idx(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      z_idx.at(i, k) = (i == k) ? -1 : m.add_variable(detail::idx2("z", i, k), VarKind::Binary, 0.0, 1.0);
    }
  }
  std::vector<int> r_idx(n);
  for (int i = 0; i < n; ++i)
    r_idx[i] = m.add_variable(detail::idx1("r", i), VarKind::Integer, 0.0, n - 1.0);

  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (i == k) continue;
      int z = static_cast<int>(z_idx.at(i, k));
      detail::add_separation_upper(m, data, wg, z, i, k, config.epsilon);
      detail::add_separation_lower(m, data, wg, z, i, k);
      // r_i - r_k >= 1 + n (z_ik - 1)
      m.add_constraint(detail::idx2("order", i, k),
                       {{r_idx[i], 1.0}, {r_idx[k], -1.0}, {z, -static_cast<double>(n)}},
                       RowSense::GreaterEqual, 1.0 - n);
    }
  }

  // Tie resolution: r_k - r_i >= 1 - n z_ik for pos-neg, pos-pos (i<k), neg-neg (i<k).
  auto add_tie_row = [&](const char* base, int i, int k) {
    int z = static_cast<int>(z_idx.at(i, k));
    m.add_constraint(detail::idx2(base, i, k),
                     {{r_idx[k], 1.0}, {r_idx[i], -1.0}, {z, static_cast<double>(n)}},
                     RowSense::GreaterEqual, 1.0);
  };
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (data.labels[i] == 1 && data.labels[k] == 0) add_tie_row("tie_pn", i, k);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      if (data.labels[i] == 1 && data.labels[k] == 1) add_tie_row("tie_pp", i, k);
      if (data.labels[i] == 0 && data.labels[k] == 0) add_tie_row("tie_nn", i, k);
    }
  }

  // t variables and (l-1) t_il <= r_i, objective sum a~_l t_il.
  for (int i = 0; i < n; ++i) {
    if (data.labels[i] != 1) continue;
    for (int l : wv.support()) {
      int t = m.add_variable(detail::idx2("t", i, l), VarKind::Binary, 0.0, 1.0);
      m.add_constraint(detail::idx2("tdef", i, l), {{t, static_cast<double>(l - 1)}, {r_idx[i], -1.0}},
                       RowSense::LessEqual, 0.0);
      m.add_objective_term(t, wv.increment_at(l));
    }
  }

  m.objective_offset = data.num_positives() * wv.value_at(1);
  m.validate();
  return m;
}

// Formulation that maximizes the regularized CLRS over Subranks. No rank
// variables: the subrank of i is sum_k z_ik. Optional strengthening rows
// tighten the relaxation without changing the integer optimum.
inline MilpModel build_subrank(const Dataset& data, const FormulationConfig& config) {
  detail::check_clrs_preconditions(data, config);
  const int n = data.n();
  const auto& wv = config.weights;
  auto positives = data.positives();

  MilpModel m;
  m.formulation = "subrank";
  m.epsilon = config.epsilon;
  m.reg_c = config.reg_c;
  detail::note_duplicates(m, data);

  auto wg = detail::add_scorer_variables(m, data.dim(), config.reg_c);

  Matrix z_idx(n, n, -1.0);
  for (int i : positives) {
    for (int k = 0; k < n; ++k) {
      z_idx.at(i, k) = m.add_variable(detail::idx2("z", i, k), VarKind::Binary, 0.0, 1.0);
    }
  }

  std::vector<std::pair<std::pair<int, int>, int>> t_vars;  // ((i, l), var)
  for (int i : positives) {
    for (int l : wv.support()) {
      int t = m.add_variable(detail::idx2("t", i, l), VarKind::Binary, 0.0, 1.0);
      std::vector<LinearTerm> terms{{t, static_cast<double>(l - 1)}};
      for (int k = 0; k < n; ++k) terms.push_back({static_cast<int>(z_idx.at(i, k)), -1.0});
      m.add_constraint(detail::idx2("tdef", i, l), std::move(terms), RowSense::LessEqual, 0.0);
      m.add_objective_term(t, wv.increment_at(l));
      t_vars.push_back({{i, l}, t});
    }
  }

  for (int i : positives) {
    for (int k = 0; k < n; ++k) {
      detail::add_separation_upper(m, data, wg, static_cast<int>(z_idx.at(i, k)), i, k, config.epsilon);
    }
  }

  if (config.include_strengthening) {
    // z_ik + z_ki = 1 for distinct positive pairs; duplicates force both to 0.
    for (size_t a = 0; a < positives.size(); ++a) {
      for (size_t b = a + 1; b < positives.size(); ++b) {
        int i = positives[a], k = positives[b];
        double rhs = data.rows_equal(i, k) ? 0.0 : 1.0;
        m.add_constraint(detail::idx2("pp_pair", i, k),
                         {{static_cast<int>(z_idx.at(i, k)), 1.0}, {static_cast<int>(z_idx.at(k, i)), 1.0}},
                         RowSense::Equal, rhs);
      }
    }
    // t_il >= t_il' for consecutive support levels.
    for (int i : positives) {
      const auto& sup = wv.support();
      for (size_t s = 0; s + 1 < sup.size(); ++s) {
        int ta = m.find_variable(detail::idx2("t", i, sup[s]));
        int tb = m.find_variable(detail::idx2("t", i, sup[s + 1]));
        m.add_constraint(detail::idx2("t_mono", i, sup[s]), {{ta, 1.0}, {tb, -1.0}}, RowSense::GreaterEqual, 0.0);
      }
    }
    // Global cap: sum a~_l t_il <= sum_l a_l.
    double cap = 0.0;
    for (int l = 1; l <= n; ++l) cap += wv.value_at(l);
    std::vector<LinearTerm> cap_terms;
    for (auto& [il, t] : t_vars) cap_terms.push_back({t, wv.increment_at(il.second)});
    m.add_constraint("objective_cap", std::move(cap_terms), RowSense::LessEqual, cap);
    // z_ik fixed to 0 when x_i = x_k (includes the diagonal).
    for (int i : positives) {
      for (int k = 0; k < n; ++k) {
        if (data.rows_equal(i, k)) m.variables[static_cast<int>(z_idx.at(i, k))].ub = 0.0;
      }
    }
  }

  m.objective_offset = data.num_positives() * wv.value_at(1);
  m.validate();
  return m;
}

// Regularized AUC maximization: one z per positive-negative pair, objective
// counts certifiably separated pairs.
inline MilpModel build_auc(const Dataset& data, const FormulationConfig& config) {
  config.validate();
  if (!data.has_both_classes()) throw ValidationError("single-class dataset: AUC undefined");

  MilpModel m;
  m.formulation = "auc";
  m.epsilon = config.epsilon;
  m.reg_c = config.reg_c;

  auto wg = detail::add_scorer_variables(m, data.dim(), config.reg_c);
  for (int i = 0; i < data.n(); ++i) {
    if (data.labels[i] != 1) continue;
    for (int k = 0; k < data.n(); ++k) {
      if (data.labels[k] != 0) continue;
      int z = m.add_variable(detail::idx2("z", i, k), VarKind::Binary, 0.0, 1.0);
      detail::add_separation_upper(m, data, wg, z, i, k, config.epsilon);
      m.add_objective_term(z, 1.0);
    }
  }
  m.validate();
  return m;
}

// General pairwise preference formulation. z variables exist only for
// declared pairs (zero-coefficient z's are omitted).
inline MilpModel build_pairwise(const Matrix& features, const PreferenceMatrix& prefs,
                                const FormulationConfig& config) {
  config.validate();
  if (features.rows != prefs.n()) throw ValidationError("preference matrix size != row count");
  if (prefs.empty()) throw ValidationError("no preference pairs declared");

  // Wrap rows in a throwaway dataset so the separation-row helper applies.
  Dataset data(features, std::vector<int>(features.rows, 0));

  MilpModel m;
  m.formulation = "pairwise";
  m.epsilon = config.epsilon;
  m.reg_c = config.reg_c;

  auto wg = detail::add_scorer_variables(m, features.cols, config.reg_c);
  for (const auto& [i, k] : prefs.pairs()) {
    int z = m.add_variable(detail::idx2("z", i, k), VarKind::Binary, 0.0, 1.0);
    detail::add_separation_upper(m, data, wg, z, i, k, config.epsilon);
    m.add_objective_term(z, 1.0);
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Epsilon-feasibility of a concrete scorer against the separation rows.
//
// The separation rows admit a scorer only if some positive rescaling puts
// every realized score gap in {0} u [eps, 1 - eps]: gaps below eps are not
// separable and gaps above 1 - eps overflow z_ik <= w'(x_i-x_k) + 1 - eps.
struct EpsilonFeasibility {
  bool feasible = false;
  double scale = 0.0;        // multiplier applied to w / ||w||_inf
  double min_positive_gap = kInf;  // at ||w||_inf = 1
  double max_gap = 0.0;            // at ||w||_inf = 1
};

inline EpsilonFeasibility check_epsilon_feasible(const Dataset& data, const LinearScorer& scorer,
                                                 double epsilon) {
  EpsilonFeasibility out;
  double winf = 0.0;
  for (double v : scorer.weights) winf = std::max(winf, std::fabs(v));
  if (winf == 0.0) {
    out.feasible = true;  // all ties; nothing to separate
    out.scale = 1.0;
    return out;
  }
  LinearScorer unit = scorer;
  for (double& v : unit.weights) v /= winf;
  auto s = score(data, unit);
  for (int i = 0; i < data.n(); ++i) {
    for (int k = 0; k < data.n(); ++k) {
      double gap = s[i] - s[k];
      if (gap > 0.0) {
        out.min_positive_gap = std::min(out.min_positive_gap, gap);
        out.max_gap = std::max(out.max_gap, gap);
      }
    }
  }
  if (out.max_gap == 0.0) {  // scorer ties everything
    out.feasible = true;
    out.scale = 1.0;
    return out;
  }
  double hi = std::min(1.0, (1.0 - epsilon) / out.max_gap);
  double lo = epsilon / out.min_positive_gap;
  if (lo <= hi) {
    out.feasible = true;
    out.scale = hi;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rounding completion: turn a relaxation's w values into a full feasible
// integer assignment for any of the four formulations. Used by the solver as
// its incumbent heuristic; all domain knowledge stays on this side.
using CompletionHook = std::function<std::optional<std::vector<double>>(const std::vector<double>&)>;

namespace detail {

struct CompletionIndex {
  int num_vars = 0;
  double epsilon = 0.0;
  std::string tag;
  std::vector<int> w_idx, gamma_idx, r_idx;
  std::vector<std::array<int, 3>> z_list;  // i, k, var
  std::vector<std::array<int, 3>> t_list;  // i, l, var
};

inline CompletionIndex index_model(const MilpModel& m) {
  CompletionIndex ix;
  ix.num_vars = m.num_variables();
  ix.epsilon = m.epsilon;
  ix.tag = m.formulation;
  auto parse2 = [](const std::string& name, size_t base_len, int& a, int& b) {
    size_t p = name.find("][", base_len);
    a = std::stoi(name.substr(base_len + 1, p - base_len - 1));
    b = std::stoi(name.substr(p + 2, name.size() - p - 3));
  };
  for (int v = 0; v < m.num_variables(); ++v) {
    const std::string& name = m.variables[v].name;
    if (name.rfind("w[", 0) == 0) ix.w_idx.push_back(v);
    else if (name.rfind("gamma[", 0) == 0) ix.gamma_idx.push_back(v);
    else if (name.rfind("r[", 0) == 0) ix.r_idx.push_back(v);
    else if (name.rfind("z[", 0) == 0) {
      int i, k;
      parse2(name, 1, i, k);
      ix.z_list.push_back({i, k, v});
    } else if (name.rfind("t[", 0) == 0) {
      int i, l;
      parse2(name, 1, i, l);
      ix.t_list.push_back({i, l, v});
    }
  }
  return ix;
}

inline std::optional<std::vector<double>> complete_candidate(const CompletionIndex& ix, const Dataset& data,
                                                             std::vector<double> w) {
  for (double& v : w) {
    if (std::fabs(v) <= 1e-12) v = 0.0;
  }
  LinearScorer scorer(w);
  auto feas = check_epsilon_feasible(data, scorer, ix.epsilon);
  if (!feas.feasible) return std::nullopt;

  double winf = 0.0;
  for (double v : w) winf = std::max(winf, std::fabs(v));
  std::vector<double> scaled = w;
  if (winf > 0.0) {
    for (double& v : scaled) v = v / winf * feas.scale;
  }

  std::vector<double> out(ix.num_vars, 0.0);
  LinearScorer final_scorer(scaled);
  auto s = score(data, final_scorer);
  const double z_thresh = ix.epsilon * (1.0 - 1e-9);
  const int n = data.n();

  for (size_t j = 0; j < ix.w_idx.size(); ++j) out[ix.w_idx[j]] = scaled[j];
  for (size_t j = 0; j < ix.gamma_idx.size(); ++j) out[ix.gamma_idx[j]] = scaled[j] != 0.0 ? 1.0 : 0.0;

  auto above = [&](int i, int k) { return s[i] - s[k] >= z_thresh; };

  for (const auto& [i, k, v] : ix.z_list) out[v] = above(i, k) ? 1.0 : 0.0;

  if (ix.tag == "resolved-rank") {
    // Resolved order matching the tie-resolution rows: by score, negatives
    // above positives within a tie, same-label ties by descending index.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    double tie_tol = ix.epsilon * 0.5;
    std::sort(order.begin(), order.end(), [&](int i, int k) {
      if (std::fabs(s[i] - s[k]) > tie_tol) return s[i] > s[k];
      if (data.labels[i] != data.labels[k]) return data.labels[i] < data.labels[k];
      return i > k;
    });
    std::vector<int> rank(n);
    for (int pos = 0; pos < n; ++pos) rank[order[pos]] = n - 1 - pos;
    for (int i = 0; i < n; ++i) out[ix.r_idx[i]] = rank[i];
    for (const auto& [i, l, v] : ix.t_list) out[v] = (l - 1 <= rank[i]) ? 1.0 : 0.0;
  } else if (ix.tag == "subrank") {
    std::vector<int> below(n, 0);
    for (const auto& [i, k, v] : ix.z_list) {
      if (out[v] > 0.5) below[i]++;
    }
    for (const auto& [i, l, v] : ix.t_list) out[v] = (below[i] >= l - 1) ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace detail

// Build the solver heuristic for a model produced by one of the builders.
// The dataset must be the one the model was built from.
inline CompletionHook make_rank_completion(const MilpModel& model, const Dataset& data) {
  auto ix = detail::index_model(model);
  Dataset data_copy = data;
  return [ix, data_copy](const std::vector<double>& relaxation) -> std::optional<std::vector<double>> {
    std::vector<double> w(ix.w_idx.size());
    for (size_t j = 0; j < ix.w_idx.size(); ++j) w[j] = relaxation[ix.w_idx[j]];
    auto cand = detail::complete_candidate(ix, data_copy, std::move(w));
    if (cand) return cand;
    // fall back to the all-ties scorer, which is always feasible
    return detail::complete_candidate(ix, data_copy, std::vector<double>(ix.w_idx.size(), 0.0));
  };
}

}  // namespace rankmip
