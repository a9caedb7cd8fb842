#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "rankmip/clock.hpp"
#include "rankmip/milp.hpp"

namespace rankmip {

enum class LpStatus { Optimal, Infeasible, Unbounded, TimeLimit, NumericalFailure };

struct LpSolution {
  LpStatus status = LpStatus::NumericalFailure;
  const char* note = "";              // failure detail when status is NumericalFailure
  std::vector<double> x;              // structural variable values
  double objective = 0.0;             // maximize convention
  std::vector<double> reduced_costs;  // minimize convention (>=0 at lower, <=0 at upper)
  std::vector<int> var_state;         // 0 at lower, 1 at upper, 2 basic
  long iterations = 0;
};

// Bounded-variable primal simplex on a dense tableau. Phase one covers rows
// whose slack starts out of bounds with one artificial column each (packed
// after the slack block); phase two drops the artificial block from the scan
// when none of them stayed basic. Dantzig pricing with a full Bland fallback
// (entering and leaving) once progress stalls. Claimed optima are verified
// against the original rows; on drift the tableau is rebuilt from the basis
// and iteration continues.
class SimplexSolver {
 public:
  struct Options {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    double pivot_tol = 1e-7;   // ratio-test floor; small pivots amplify drift
    double harris_tol = 1e-7;  // bound relaxation in the two-pass ratio test
    long max_iterations = 0;   // 0: derived from size
    bool start_with_bland = false;
    WorkClock* clock = nullptr;
  };

  LpSolution solve(const MilpModel& model, const std::vector<double>& lb, const std::vector<double>& ub) {
    return solve(model, lb, ub, Options());
  }

  LpSolution solve(const MilpModel& model, const std::vector<double>& lb, const std::vector<double>& ub,
                   Options opt) {
    opt_ = opt;
    setup(model, lb, ub);
    bland_ = opt.start_with_bland;
    if (opt_.max_iterations <= 0) opt_.max_iterations = 5000 + 80L * (m_ + ncols_);

    LpSolution out;
    out.iterations = 0;

    if (n_art_ > 0) {
      set_phase1_costs();
      LpStatus st = iterate(true, out.iterations);
      if (st != LpStatus::Optimal) {
        out.status = st;
        out.note = "phase 1";
        return out;
      }
      recompute_beta();
      double infeas = 0.0;
      for (int r = 0; r < m_; ++r) {
        if (is_artificial(basis_[r])) infeas += std::max(0.0, beta_[r]);
      }
      if (infeas > 1e-7) {
        out.status = LpStatus::Infeasible;
        return out;
      }
      for (int j = n_struct_ + m_; j < ncols_; ++j) lb_[j] = ub_[j] = 0.0;
      bool any_basic_artificial = false;
      for (int r = 0; r < m_; ++r) any_basic_artificial |= is_artificial(basis_[r]);
      if (!any_basic_artificial) scan_cols_ = n_struct_ + m_;
    }

    set_phase2_costs(model);
    LpStatus st = iterate(false, out.iterations);
    if (st != LpStatus::Optimal) {
      out.status = st;
      out.note = "phase 2";
      return out;
    }

    // Verify against the original rows; rebuild and continue on drift.
    for (int attempt = 0; attempt < 3; ++attempt) {
      recompute_beta();
      recompute_costs();
      if (has_entering_candidate(10.0 * opt_.opt_tol)) {
        st = iterate(false, out.iterations);
        if (st != LpStatus::Optimal) {
          out.status = st;
          out.note = "verification re-iteration";
          return out;
        }
        continue;
      }
      double resid = max_row_residual(model);
      if (resid <= 1e-8) break;
      if (std::getenv("RANKMIP_LP_DEBUG"))
        std::fprintf(stderr, "[lp] attempt %d resid %.3e iters %ld m=%d\n", attempt, resid, out.iterations, m_);
      if (attempt == 2 || !rebuild_from_basis(model)) {
        out.status = LpStatus::NumericalFailure;
        out.note = "residual above tolerance after rebuilds";
        return out;
      }
    }

    out.status = LpStatus::Optimal;
    out.x.assign(n_struct_, 0.0);
    for (int j = 0; j < n_struct_; ++j) out.x[j] = value_of(j);
    out.objective = 0.0;
    for (const auto& t : model.objective) out.objective += t.coef * out.x[t.var];
    out.reduced_costs.assign(n_struct_, 0.0);
    out.var_state.assign(n_struct_, 0);
    for (int j = 0; j < n_struct_; ++j) {
      out.reduced_costs[j] = d_[j];
      out.var_state[j] = state_[j] == State::Basic ? 2 : (state_[j] == State::AtUpper ? 1 : 0);
    }
    return out;
  }

 private:
  enum class State : unsigned char { AtLower, AtUpper, Basic };

  Options opt_;
  int n_struct_ = 0, m_ = 0, ncols_ = 0, n_art_ = 0;
  int scan_cols_ = 0;  // pricing/pivot range; excludes dead artificials in phase 2
  std::vector<double> tab_;   // m x (ncols + 1), last column is B^-1 b
  std::vector<double> d_;     // reduced costs, minimize convention
  std::vector<double> cost_;  // current phase costs
  std::vector<double> lb_, ub_, beta_;
  std::vector<double> art_sigma_;  // artificial sign per row; 0 when the row has none
  std::vector<int> art_col_;       // artificial column per row; -1 when none
  std::vector<int> basis_;
  std::vector<State> state_;
  bool bland_ = false;
  long stall_ = 0;
  double best_obj_seen_ = 0.0;

  double* row(int r) { return tab_.data() + static_cast<size_t>(r) * (ncols_ + 1); }
  double& rhs(int r) { return row(r)[ncols_]; }
  bool is_artificial(int j) const { return j >= n_struct_ + m_; }

  double value_of(int j) const {
    if (state_[j] == State::AtLower) return lb_[j];
    if (state_[j] == State::AtUpper) return ub_[j];
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] == j) return beta_[r];
    }
    return 0.0;
  }

  double bound_value(int j) const { return state_[j] == State::AtUpper ? ub_[j] : lb_[j]; }

  void setup(const MilpModel& model, const std::vector<double>& lb, const std::vector<double>& ub) {
    n_struct_ = model.num_variables();
    m_ = model.num_constraints();
    bland_ = false;
    stall_ = 0;

    // pass 1: slack feasibility at the all-at-lower nonbasic point
    std::vector<double> slack_val(m_);
    std::vector<char> needs_art(m_, 0);
    n_art_ = 0;
    for (int r = 0; r < m_; ++r) {
      const auto& c = model.constraints[r];
      double act = 0.0;
      for (const auto& t : c.terms) act += t.coef * lb[t.var];
      slack_val[r] = c.rhs - act;
      double slo = c.sense == RowSense::GreaterEqual ? -kInf : 0.0;
      double sup = c.sense == RowSense::LessEqual ? kInf : 0.0;
      if (slack_val[r] < slo - opt_.feas_tol || slack_val[r] > sup + opt_.feas_tol) {
        needs_art[r] = 1;
        ++n_art_;
      }
    }

    ncols_ = n_struct_ + m_ + n_art_;
    scan_cols_ = ncols_;
    tab_.assign(static_cast<size_t>(m_) * (ncols_ + 1), 0.0);
    lb_.assign(ncols_, 0.0);
    ub_.assign(ncols_, 0.0);
    state_.assign(ncols_, State::AtLower);
    basis_.assign(m_, -1);
    beta_.assign(m_, 0.0);
    art_sigma_.assign(m_, 0.0);
    art_col_.assign(m_, -1);

    for (int j = 0; j < n_struct_; ++j) {
      lb_[j] = lb[j];
      ub_[j] = ub[j];
    }
    int next_art = n_struct_ + m_;
    for (int r = 0; r < m_; ++r) {
      const auto& c = model.constraints[r];
      int s = n_struct_ + r;
      switch (c.sense) {
        case RowSense::LessEqual: lb_[s] = 0.0; ub_[s] = kInf; break;
        case RowSense::GreaterEqual: lb_[s] = -kInf; ub_[s] = 0.0; break;
        case RowSense::Equal: lb_[s] = ub_[s] = 0.0; break;
      }
      double* tr = row(r);
      for (const auto& t : c.terms) tr[t.var] += t.coef;
      tr[s] = 1.0;
      tr[ncols_] = c.rhs;

      if (!needs_art[r]) {
        basis_[r] = s;
        state_[s] = State::Basic;
        beta_[r] = std::clamp(slack_val[r], lb_[s], ub_[s]);
        continue;
      }
      double clamped = std::clamp(slack_val[r], lb_[s], ub_[s]);
      if (!std::isfinite(clamped)) clamped = 0.0;
      state_[s] = (std::isfinite(ub_[s]) && clamped == ub_[s]) ? State::AtUpper : State::AtLower;
      double resid = slack_val[r] - clamped;
      int a = next_art++;
      double sigma = resid >= 0.0 ? 1.0 : -1.0;
      art_sigma_[r] = sigma;
      art_col_[r] = a;
      tr[a] = sigma;
      lb_[a] = 0.0;
      ub_[a] = kInf;
      basis_[r] = a;
      state_[a] = State::Basic;
      beta_[r] = std::fabs(resid);
      if (sigma < 0.0) {
        for (int c2 = 0; c2 <= ncols_; ++c2) tr[c2] = -tr[c2];
      }
    }
  }

  void set_phase1_costs() {
    cost_.assign(ncols_, 0.0);
    for (int j = n_struct_ + m_; j < ncols_; ++j) cost_[j] = 1.0;
    recompute_costs();
  }

  void set_phase2_costs(const MilpModel& model) {
    cost_.assign(ncols_, 0.0);
    for (const auto& t : model.objective) cost_[t.var] -= t.coef;  // minimize internally
    recompute_costs();
  }

  void recompute_costs() {
    d_ = cost_;
    for (int r = 0; r < m_; ++r) {
      double cb = cost_[basis_[r]];
      if (cb == 0.0) continue;
      const double* tr = row(r);
      for (int j = 0; j < scan_cols_; ++j) d_[j] -= cb * tr[j];
    }
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < scan_cols_) d_[basis_[r]] = 0.0;
    }
    stall_ = 0;
    best_obj_seen_ = current_objective();
  }

  // beta = B^-1 b - sum over nonbasic of T_j xbar_j via the maintained column.
  void recompute_beta() {
    for (int r = 0; r < m_; ++r) beta_[r] = rhs(r);
    for (int j = 0; j < ncols_; ++j) {
      if (state_[j] == State::Basic) continue;
      double v = bound_value(j);
      if (v == 0.0) continue;
      for (int r = 0; r < m_; ++r) beta_[r] -= row(r)[j] * v;
    }
  }

  double current_objective() const {
    double z = 0.0;
    for (int j = 0; j < ncols_; ++j) {
      if (state_[j] != State::Basic && cost_[j] != 0.0) z += cost_[j] * bound_value(j);
    }
    for (int r = 0; r < m_; ++r) z += cost_[basis_[r]] * beta_[r];
    return z;
  }

  bool eligible(int j, double tol) const {
    if (state_[j] == State::Basic) return false;
    if (ub_[j] - lb_[j] <= 0.0) return false;
    if (state_[j] == State::AtLower) return d_[j] < -tol;
    return d_[j] > tol;
  }

  bool has_entering_candidate(double tol) const {
    for (int j = 0; j < scan_cols_; ++j) {
      if (eligible(j, tol)) return true;
    }
    return false;
  }

  int pick_entering() const {
    if (bland_) {
      for (int j = 0; j < scan_cols_; ++j) {
        if (eligible(j, opt_.opt_tol)) return j;
      }
      return -1;
    }
    int best = -1;
    double best_score = opt_.opt_tol;
    for (int j = 0; j < scan_cols_; ++j) {
      if (!eligible(j, opt_.opt_tol)) continue;
      double score = std::fabs(d_[j]);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  LpStatus iterate(bool phase1, long& iters) {
    while (true) {
      if (iters >= opt_.max_iterations) return LpStatus::NumericalFailure;  // iteration cap
      if (opt_.clock && (iters & 63) == 0 && opt_.clock->expired()) return LpStatus::TimeLimit;

      int q = pick_entering();
      if (q < 0) return LpStatus::Optimal;
      double sigma = state_[q] == State::AtLower ? 1.0 : -1.0;

      // Two-pass Harris ratio test: pass 1 finds the largest step allowed
      // when basic bounds are relaxed by harris_tol, pass 2 picks the
      // largest-magnitude pivot among rows blocking within that step.
      double flip = ub_[q] - lb_[q];
      double theta_relaxed = flip;
      for (int r = 0; r < m_; ++r) {
        double g = sigma * row(r)[q];
        if (std::fabs(g) <= opt_.pivot_tol) continue;
        int b = basis_[r];
        double t;
        if (g > 0.0) {
          if (!std::isfinite(lb_[b])) continue;
          t = (beta_[r] - (lb_[b] - opt_.harris_tol)) / g;
        } else {
          if (!std::isfinite(ub_[b])) continue;
          t = (beta_[r] - (ub_[b] + opt_.harris_tol)) / g;
        }
        if (t < 0.0) t = 0.0;
        theta_relaxed = std::min(theta_relaxed, t);
      }

      double theta = flip;
      int leave_row = -1;
      double leave_pivot = 0.0;
      bool leave_hits_upper = false;
      for (int r = 0; r < m_; ++r) {
        double g = sigma * row(r)[q];
        if (std::fabs(g) <= opt_.pivot_tol) continue;
        int b = basis_[r];
        double t;
        bool hits_upper;
        if (g > 0.0) {
          if (!std::isfinite(lb_[b])) continue;
          t = (beta_[r] - lb_[b]) / g;
          hits_upper = false;
        } else {
          if (!std::isfinite(ub_[b])) continue;
          t = (beta_[r] - ub_[b]) / g;
          hits_upper = true;
        }
        if (t < 0.0) t = 0.0;
        if (t > theta_relaxed) continue;  // not blocking within the relaxed step
        bool better;
        if (leave_row < 0) {
          better = t < theta;  // must actually block before the bound flip
        } else if (bland_) {
          better = basis_[r] < basis_[leave_row];  // smallest index anti-cycling
        } else {
          better = std::fabs(row(r)[q]) > std::fabs(leave_pivot);
        }
        if (better) {
          theta = std::min(t, theta_relaxed);
          leave_row = r;
          leave_pivot = row(r)[q];
          leave_hits_upper = hits_upper;
        }
      }
      if (leave_row >= 0) theta = std::max(0.0, std::min(theta, theta_relaxed));

      if (!std::isfinite(theta)) return phase1 ? LpStatus::NumericalFailure : LpStatus::Unbounded;
      ++iters;
      if (opt_.clock) opt_.clock->add_work(static_cast<double>(m_) * (scan_cols_ + 1));

      double before = best_obj_seen_;
      if (leave_row < 0) {
        // bound flip
        double delta = sigma * theta;
        for (int r = 0; r < m_; ++r) beta_[r] -= row(r)[q] * delta;
        state_[q] = state_[q] == State::AtLower ? State::AtUpper : State::AtLower;
      } else {
        pivot(leave_row, q, sigma * theta, leave_hits_upper);
      }

      double now_obj = current_objective();
      if (now_obj < before - 1e-13 * (1.0 + std::fabs(before))) {
        best_obj_seen_ = now_obj;
        stall_ = 0;
      } else if (++stall_ > 5L * (m_ + ncols_)) {
        bland_ = true;
      }
      if ((iters & 511) == 0) recompute_beta();
    }
  }

  void pivot(int r, int q, double step, bool leaving_to_upper) {
    int old_basic = basis_[r];
    double enter_value = bound_value(q) + step;

    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      beta_[i] -= row(i)[q] * step;
    }
    state_[old_basic] = leaving_to_upper ? State::AtUpper : State::AtLower;

    double* pr = row(r);
    double inv = 1.0 / pr[q];
    for (int j = 0; j < scan_cols_; ++j) pr[j] *= inv;
    pr[ncols_] *= inv;
    pr[q] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double f = row(i)[q];
      if (f == 0.0) continue;
      double* ti = row(i);
      for (int j = 0; j < scan_cols_; ++j) ti[j] -= f * pr[j];
      ti[ncols_] -= f * pr[ncols_];
      ti[q] = 0.0;
    }
    double fd = d_[q];
    if (fd != 0.0) {
      for (int j = 0; j < scan_cols_; ++j) d_[j] -= fd * pr[j];
      d_[q] = 0.0;
    }

    basis_[r] = q;
    state_[q] = State::Basic;
    beta_[r] = enter_value;
  }

  double max_row_residual(const MilpModel& model) {
    double worst = 0.0;
    std::vector<double> x(ncols_, 0.0);
    for (int j = 0; j < ncols_; ++j) {
      if (state_[j] != State::Basic) x[j] = bound_value(j);
    }
    for (int r = 0; r < m_; ++r) x[basis_[r]] = beta_[r];
    for (int r = 0; r < m_; ++r) {
      double act = 0.0;
      double scale = 1.0 + std::fabs(model.constraints[r].rhs);
      for (const auto& t : model.constraints[r].terms) {
        double term = t.coef * x[t.var];
        act += term;
        scale = std::max(scale, std::fabs(term));
      }
      act += x[n_struct_ + r];
      if (art_col_[r] >= 0) act += art_sigma_[r] * x[art_col_[r]];
      worst = std::max(worst, std::fabs(act - model.constraints[r].rhs) / scale);
    }
    for (int j = 0; j < ncols_; ++j) {
      if (state_[j] == State::Basic) continue;
      worst = std::max(worst, std::max(lb_[j] - x[j], x[j] - ub_[j]));
    }
    return worst;
  }

  // Re-derive the tableau from the original rows by pivoting the recorded
  // basis back in; recovers from accumulated floating-point drift.
  bool rebuild_from_basis(const MilpModel& model) {
    std::vector<int> saved_basis = basis_;
    scan_cols_ = ncols_;
    for (auto& v : tab_) v = 0.0;
    for (int r = 0; r < m_; ++r) {
      const auto& c = model.constraints[r];
      double* tr = row(r);
      for (const auto& t : c.terms) tr[t.var] += t.coef;
      tr[n_struct_ + r] = 1.0;
      if (art_col_[r] >= 0) tr[art_col_[r]] = art_sigma_[r];
      tr[ncols_] = c.rhs;
    }
    // Pivot rows in greedy order of pivot magnitude; each basic variable is
    // still eliminated in its own row, only the processing order is free.
    std::vector<char> done(m_, 0);
    for (int step = 0; step < m_; ++step) {
      int r = -1;
      double best = 0.0;
      for (int cand = 0; cand < m_; ++cand) {
        if (done[cand]) continue;
        double p = std::fabs(row(cand)[saved_basis[cand]]);
        if (p > best) {
          best = p;
          r = cand;
        }
      }
      if (r < 0 || best < 1e-11) return false;
      done[r] = 1;
      int q = saved_basis[r];
      double* pr = row(r);
      double inv = 1.0 / pr[q];
      for (int j = 0; j <= ncols_; ++j) pr[j] *= inv;
      pr[q] = 1.0;
      for (int i = 0; i < m_; ++i) {
        if (i == r) continue;
        double f = row(i)[q];
        if (f == 0.0) continue;
        double* ti = row(i);
        for (int j = 0; j <= ncols_; ++j) ti[j] -= f * pr[j];
        ti[q] = 0.0;
      }
    }
    recompute_beta();
    recompute_costs();
    return true;
  }
};

// LP relaxation of a model at its declared bounds.
inline LpSolution solve_lp(const MilpModel& model) {
  std::vector<double> lb(model.num_variables()), ub(model.num_variables());
  for (int j = 0; j < model.num_variables(); ++j) {
    lb[j] = model.variables[j].lb;
    ub[j] = model.variables[j].ub;
  }
  SimplexSolver s;
  return s.solve(model, lb, ub);
}

}  // namespace rankmip
