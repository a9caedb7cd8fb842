#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <queue>
#include <vector>

#include "rankmip/clock.hpp"
#include "rankmip/formulations.hpp"
#include "rankmip/milp.hpp"
#include "rankmip/simplex.hpp"

namespace rankmip {

struct SolverConfig {
  double time_limit_s = 60.0;
  double gap_tolerance = 1e-7;   // relative, on (bound - incumbent)/max(1,|incumbent|)
  double integrality_tol = 1e-6;
  enum class NodeSelection { BestBound, DepthFirstDive };
  enum class Branching { MostFractional, PseudoCostLite };
  NodeSelection node_selection = NodeSelection::BestBound;
  Branching branching = Branching::MostFractional;
  uint64_t seed = 0;
  WorkClock::Mode clock_mode = WorkClock::Mode::Wall;
  bool reduced_cost_fixing = true;
  int dive_period = 50;  // best-bound picks between depth-first dives

  void validate() const {
    if (!(time_limit_s > 0.0)) throw ValidationError("time limit must be positive");
    if (!(gap_tolerance >= 0.0 && gap_tolerance < 1.0)) throw ValidationError("gap tolerance must be in [0,1)");
    if (!(integrality_tol > 0.0 && integrality_tol < 1.0))
      throw ValidationError("integrality tolerance must be in (0,1)");
  }
};

struct TracePoint {
  double elapsed_s = 0.0;
  double incumbent = -kInf;
  double bound = kInf;

  double gap() const {
    if (incumbent == -kInf && bound == -kInf) return 0.0;
    return (bound - incumbent) / std::max(1.0, std::fabs(incumbent));
  }
};

struct MilpSolution {
  enum class Status { Optimal, FeasibleTimeLimit, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  std::vector<double> values;
  double objective = -kInf;  // incumbent, includes the model offset
  double best_bound = kInf;  // includes the model offset
  double gap = kInf;
  std::vector<TracePoint> trace;
  long node_count = 0;
  long lp_iterations = 0;
  double solve_seconds = 0.0;

  static const char* status_name(Status s) {
    switch (s) {
      case Status::Optimal: return "optimal";
      case Status::FeasibleTimeLimit: return "feasible-time-limit";
      case Status::Infeasible: return "infeasible";
      case Status::Unbounded: return "unbounded";
    }
    return "?";
  }
};

// elapsed_s,incumbent,bound,gap -- one row per improvement plus a final row.
inline void write_trace_csv(const MilpSolution& sol, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open trace file " + path);
  f << "elapsed_s,incumbent,bound,gap\n";
  char buf[160];
  for (const auto& p : sol.trace) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.17g,%.17g,%.17g\n", p.elapsed_s, p.incumbent, p.bound, p.gap());
    f << buf;
  }
}

// Best-first branch and bound over LP relaxations solved from scratch by
// SimplexSolver, with interval propagation at every node, reduced-cost
// fixing against the incumbent, and a periodic depth-first dive to pick up
// incumbents early. An optional completion hook (see make_rank_completion)
// turns relaxation scores into feasible integer assignments; every candidate
// is re-validated against the model before it may become the incumbent.
class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, const SolverConfig& config, CompletionHook hook = nullptr)
      : model_(model), config_(config), hook_(std::move(hook)) {
    config_.validate();
    model_.validate();
  }

  MilpSolution solve() {
    const int nv = model_.num_variables();
    WorkClock clock(config_.clock_mode, config_.time_limit_s);
    MilpSolution sol;

    base_lb_.resize(nv);
    base_ub_.resize(nv);
    for (int j = 0; j < nv; ++j) {
      base_lb_[j] = model_.variables[j].lb;
      base_ub_[j] = model_.variables[j].ub;
    }
    obj_coef_.assign(nv, 0.0);
    for (const auto& t : model_.objective) obj_coef_[t.var] += t.coef;
    init_pseudo_costs();

    // Structural bound from the variable boxes alone; valid before any LP.
    double root_bound = model_.objective_offset;
    for (int j = 0; j < nv; ++j) root_bound += std::max(obj_coef_[j] * base_lb_[j], obj_coef_[j] * base_ub_[j]);

    incumbent_ = -kInf;
    global_bound_ = root_bound;
    if (hook_) try_candidate(hook_(std::vector<double>(nv, 0.0)));
    emit(clock, true);

    if (!propagate(base_lb_, base_ub_)) {
      finish(sol, clock, MilpSolution::Status::Infeasible);
      return sol;
    }

    nodes_.push_back({-1, root_bound, {}});
    queue_.push({root_bound, 0});

    SimplexSolver simplex;
    SimplexSolver::Options lp_opt;
    lp_opt.clock = &clock;
    std::vector<double> lb(nv), ub(nv);
    long nodes_since_dive = 0;
    bool timed_out = false;

    while (true) {
      if (clock.expired()) {
        timed_out = true;
        break;
      }
      int id = -1;
      if (!dive_stack_.empty()) {
        id = dive_stack_.back();
        dive_stack_.pop_back();
      } else if (!queue_.empty()) {
        id = queue_.top().second;
        queue_.pop();
      } else {
        break;
      }
      if (nodes_[id].bound <= incumbent_ + prune_eps()) {
        update_bound(clock);
        continue;
      }

      reconstruct_bounds(id, lb, ub);
      if (!propagate(lb, ub)) {
        update_bound(clock);
        continue;
      }

      processing_bound_ = nodes_[id].bound;
      LpSolution lp = simplex.solve(model_, lb, ub, lp_opt);
      if (lp.status == LpStatus::NumericalFailure) {
        // one stable retry: Bland from the start avoids the degenerate paths
        // that produced the drift
        SimplexSolver::Options stable = lp_opt;
        stable.start_with_bland = true;
        stable.harris_tol = 0.0;
        lp = simplex.solve(model_, lb, ub, stable);
      }
      sol.lp_iterations += lp.iterations;
      ++sol.node_count;
      ++nodes_since_dive;

      if (lp.status == LpStatus::TimeLimit) {
        timed_out = true;
        break;
      }
      if (lp.status == LpStatus::Unbounded) {
        finish(sol, clock, MilpSolution::Status::Unbounded);
        return sol;
      }
      if (lp.status == LpStatus::NumericalFailure)
        throw SolverError("LP relaxation failed numerically at node " + std::to_string(id) + " (" +
                          lp.note + ", " + std::to_string(lp.iterations) + " iterations)");
      if (lp.status == LpStatus::Infeasible) {
        fathom(clock);
        continue;
      }

      double z = lp.objective + model_.objective_offset;
      nodes_[id].bound = z;
      processing_bound_ = z;
      update_pseudo_cost(id, z);
      if (z <= incumbent_ + prune_eps()) {
        fathom(clock);
        continue;
      }

      if (hook_) {
        try_candidate(hook_(lp.x));
        emit(clock);
      }
      if (gap_closed()) break;
      if (z <= incumbent_ + prune_eps()) {
        fathom(clock);
        continue;
      }

      int branch_var = pick_branch_var(lp.x);
      if (branch_var < 0) {
        // integral relaxation: snap and accept
        std::vector<double> snapped = lp.x;
        for (int j = 0; j < nv; ++j) {
          if (model_.variables[j].kind != VarKind::Continuous) snapped[j] = std::round(snapped[j]);
        }
        try_candidate(std::move(snapped));
        fathom(clock);
        if (gap_closed()) break;
        continue;
      }

      std::vector<BoundChange> extra;
      if (config_.reduced_cost_fixing && incumbent_ > -kInf) extra = reduced_cost_fixes(lp, lb, ub, z);

      double frac = lp.x[branch_var];
      int down = make_child(id, branch_var, lb[branch_var], std::floor(frac), extra, z);
      int up = make_child(id, branch_var, std::ceil(frac), ub[branch_var], extra, z);
      record_branch(down, branch_var, frac - std::floor(frac), z, false);
      record_branch(up, branch_var, std::ceil(frac) - frac, z, true);

      bool dive_now = config_.node_selection == SolverConfig::NodeSelection::DepthFirstDive ||
                      !dive_stack_.empty() || nodes_since_dive >= config_.dive_period;
      if (dive_now) {
        if (nodes_since_dive >= config_.dive_period) nodes_since_dive = 0;
        int preferred = (frac - std::floor(frac)) >= 0.5 ? up : down;
        int other = preferred == up ? down : up;
        queue_.push({nodes_[other].bound, other});
        dive_stack_.push_back(preferred);
      } else {
        queue_.push({nodes_[down].bound, down});
        queue_.push({nodes_[up].bound, up});
      }
      processing_bound_ = -kInf;
      update_bound(clock);
    }

    MilpSolution::Status st;
    if (timed_out) {
      st = MilpSolution::Status::FeasibleTimeLimit;
    } else if (incumbent_ > -kInf) {
      if (!gap_closed()) global_bound_ = incumbent_;  // tree exhausted: proof complete
      st = MilpSolution::Status::Optimal;
    } else {
      global_bound_ = -kInf;  // exhausted with no feasible point
      st = MilpSolution::Status::Infeasible;
    }
    finish(sol, clock, st);
    return sol;
  }

  // Thread-safe view of the trace so far (one solve owns the model; other
  // threads may poll progress).
  std::vector<TracePoint> trace_snapshot() const {
    std::lock_guard<std::mutex> g(trace_mutex_);
    return trace_;
  }

 private:
  struct BoundChange {
    int var;
    double lb, ub;
  };
  struct Node {
    int parent;
    double bound;
    std::vector<BoundChange> changes;
    int branch_var = -1;
    double branch_unit = 0.0;
    double parent_obj = 0.0;
    bool branch_up = false;
    bool pc_recorded = false;
  };

  MilpModel model_;
  SolverConfig config_;
  CompletionHook hook_;
  std::vector<Node> nodes_;
  std::priority_queue<std::pair<double, int>> queue_;
  std::vector<int> dive_stack_;
  std::vector<double> base_lb_, base_ub_, obj_coef_;
  std::vector<double> pc_up_, pc_dn_;
  std::vector<long> pc_up_n_, pc_dn_n_;
  double incumbent_ = -kInf;
  std::vector<double> incumbent_values_;
  double global_bound_ = kInf;
  double processing_bound_ = -kInf;
  std::vector<TracePoint> trace_;
  mutable std::mutex trace_mutex_;
  double last_emit_inc_ = -kInf, last_emit_bound_ = kInf;

  double prune_eps() const {
    return std::max(1e-9, 0.5 * config_.gap_tolerance * std::max(1.0, std::fabs(incumbent_)));
  }

  bool gap_closed() const {
    if (incumbent_ <= -kInf) return false;
    return (global_bound_ - incumbent_) <= config_.gap_tolerance * std::max(1.0, std::fabs(incumbent_));
  }

  void fathom(const WorkClock& clock) {
    processing_bound_ = -kInf;
    update_bound(clock);
  }

  void init_pseudo_costs() {
    int nv = model_.num_variables();
    pc_up_.assign(nv, 0.0);
    pc_dn_.assign(nv, 0.0);
    pc_up_n_.assign(nv, 0);
    pc_dn_n_.assign(nv, 0);
    for (int j = 0; j < nv; ++j) pc_up_[j] = pc_dn_[j] = std::fabs(obj_coef_[j]) + 1e-4;
  }

  void record_branch(int child, int var, double unit, double parent_obj, bool up) {
    nodes_[child].branch_var = var;
    nodes_[child].branch_unit = std::max(unit, 1e-9);
    nodes_[child].parent_obj = parent_obj;
    nodes_[child].branch_up = up;
  }

  void update_pseudo_cost(int id, double child_obj) {
    Node& nd = nodes_[id];
    if (nd.branch_var < 0 || nd.pc_recorded) return;
    nd.pc_recorded = true;
    double degrade = std::max(0.0, nd.parent_obj - child_obj) / nd.branch_unit;
    double& pc = nd.branch_up ? pc_up_[nd.branch_var] : pc_dn_[nd.branch_var];
    long& cnt = nd.branch_up ? pc_up_n_[nd.branch_var] : pc_dn_n_[nd.branch_var];
    pc = (pc * cnt + degrade) / (cnt + 1);
    ++cnt;
  }

  int make_child(int parent, int var, double new_lb, double new_ub, const std::vector<BoundChange>& extra,
                 double bound) {
    Node child;
    child.parent = parent;
    child.bound = bound;
    child.changes = extra;
    child.changes.push_back({var, new_lb, new_ub});
    nodes_.push_back(std::move(child));
    return static_cast<int>(nodes_.size()) - 1;
  }

  void reconstruct_bounds(int id, std::vector<double>& lb, std::vector<double>& ub) const {
    lb = base_lb_;
    ub = base_ub_;
    for (int cur = id; cur >= 0; cur = nodes_[cur].parent) {
      for (const auto& ch : nodes_[cur].changes) {
        lb[ch.var] = std::max(lb[ch.var], ch.lb);
        ub[ch.var] = std::min(ub[ch.var], ch.ub);
      }
    }
  }

  // Interval (activity) propagation over all rows, two passes, with integer
  // bound rounding. Returns false when some variable's bounds cross.
  bool propagate(std::vector<double>& lb, std::vector<double>& ub) const {
    for (int pass = 0; pass < 12; ++pass) {
      std::vector<double> lb_before = lb, ub_before = ub;
      for (const auto& c : model_.constraints) {
        if (c.sense != RowSense::GreaterEqual) {  // a.x <= rhs side
          double minact = 0.0;
          for (const auto& t : c.terms) minact += t.coef > 0 ? t.coef * lb[t.var] : t.coef * ub[t.var];
          if (minact > c.rhs + 1e-7) return false;
          for (const auto& t : c.terms) {
            double rest = minact - (t.coef > 0 ? t.coef * lb[t.var] : t.coef * ub[t.var]);
            double room = c.rhs - rest + 1e-9;
            if (t.coef > 0) ub[t.var] = std::min(ub[t.var], room / t.coef);
            else lb[t.var] = std::max(lb[t.var], room / t.coef);
          }
        }
        if (c.sense != RowSense::LessEqual) {  // a.x >= rhs side
          double maxact = 0.0;
          for (const auto& t : c.terms) maxact += t.coef > 0 ? t.coef * ub[t.var] : t.coef * lb[t.var];
          if (maxact < c.rhs - 1e-7) return false;
          for (const auto& t : c.terms) {
            double rest = maxact - (t.coef > 0 ? t.coef * ub[t.var] : t.coef * lb[t.var]);
            double room = c.rhs - rest - 1e-9;
            if (t.coef > 0) lb[t.var] = std::max(lb[t.var], room / t.coef);
            else ub[t.var] = std::min(ub[t.var], room / t.coef);
          }
        }
      }
      for (int j = 0; j < model_.num_variables(); ++j) {
        if (model_.variables[j].kind != VarKind::Continuous) {
          lb[j] = std::ceil(lb[j] - 1e-9);
          ub[j] = std::floor(ub[j] + 1e-9);
        }
        if (lb[j] > ub[j] + 1e-9) return false;
      }
      bool changed = false;
      for (int j = 0; j < model_.num_variables() && !changed; ++j) {
        changed = lb[j] > lb_before[j] + 1e-12 || ub[j] < ub_before[j] - 1e-12;
      }
      if (!changed) break;
    }
    return true;
  }

  // Objective-cutoff propagation through the node LP's reduced costs: an
  // integer variable whose move away from its bound costs more than the
  // bound-to-incumbent slack can be restricted within this subtree.
  std::vector<BoundChange> reduced_cost_fixes(const LpSolution& lp, const std::vector<double>& lb,
                                              const std::vector<double>& ub, double z) const {
    std::vector<BoundChange> out;
    double slack = z - (incumbent_ + prune_eps());
    if (slack <= 0.0) return out;
    for (int j = 0; j < model_.num_variables(); ++j) {
      if (model_.variables[j].kind == VarKind::Continuous) continue;
      if (lp.var_state[j] == 2) continue;
      double rate = std::fabs(lp.reduced_costs[j]);
      if (rate < 1e-7) continue;
      double span = std::floor(slack / rate + 1e-9);
      if (lp.var_state[j] == 0) {
        double new_ub = lb[j] + span;
        if (new_ub < ub[j] - 0.5) out.push_back({j, lb[j], new_ub});
      } else {
        double new_lb = ub[j] - span;
        if (new_lb > lb[j] + 0.5) out.push_back({j, new_lb, ub[j]});
      }
    }
    return out;
  }

  int pick_branch_var(const std::vector<double>& x) const {
    int best = -1;
    double best_score = -1.0;
    for (int j = 0; j < model_.num_variables(); ++j) {
      if (model_.variables[j].kind == VarKind::Continuous) continue;
      double f = x[j] - std::floor(x[j]);
      double dist = std::min(f, 1.0 - f);
      if (dist <= config_.integrality_tol) continue;
      double score;
      if (config_.branching == SolverConfig::Branching::PseudoCostLite) {
        score = std::max(pc_up_[j] * (1.0 - f), 1e-9) * std::max(pc_dn_[j] * f, 1e-9);
      } else {
        score = dist;
      }
      if (score > best_score + 1e-15) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  void try_candidate(std::optional<std::vector<double>> cand) {
    if (cand) try_candidate(std::move(*cand));
  }

  void try_candidate(std::vector<double> x) {
    if (static_cast<int>(x.size()) != model_.num_variables()) return;
    for (int j = 0; j < model_.num_variables(); ++j) {
      const auto& v = model_.variables[j];
      if (v.kind != VarKind::Continuous) {
        double r = std::round(x[j]);
        if (std::fabs(x[j] - r) > 1e-5) return;
        x[j] = r;
      }
      if (x[j] < v.lb - 1e-7 || x[j] > v.ub + 1e-7) return;
      x[j] = std::clamp(x[j], v.lb, v.ub);
    }
    for (const auto& c : model_.constraints) {
      double act = 0.0;
      for (const auto& t : c.terms) act += t.coef * x[t.var];
      if (c.sense != RowSense::GreaterEqual && act > c.rhs + 1e-5) return;
      if (c.sense != RowSense::LessEqual && act < c.rhs - 1e-5) return;
    }
    double obj = model_.objective_value(x);
    if (obj > incumbent_ + 1e-12) {
      incumbent_ = obj;
      incumbent_values_ = std::move(x);
    }
  }

  void update_bound(const WorkClock& clock) {
    double open = std::max(incumbent_, processing_bound_);
    if (!queue_.empty()) open = std::max(open, queue_.top().first);
    for (int id : dive_stack_) open = std::max(open, nodes_[id].bound);
    global_bound_ = std::min(global_bound_, open);
    emit(clock);
  }

  void emit(const WorkClock& clock, bool force = false) {
    if (!force && incumbent_ <= last_emit_inc_ + 1e-12 && global_bound_ >= last_emit_bound_ - 1e-12) return;
    if (incumbent_ > -kInf) last_emit_inc_ = std::max(last_emit_inc_, incumbent_);
    last_emit_bound_ = std::min(last_emit_bound_, global_bound_);
    std::lock_guard<std::mutex> g(trace_mutex_);
    trace_.push_back({clock.elapsed_s(), incumbent_, global_bound_});
  }

  void finish(MilpSolution& sol, const WorkClock& clock, MilpSolution::Status st) {
    sol.status = st;
    sol.objective = incumbent_;
    sol.values = incumbent_values_;
    sol.best_bound = global_bound_;
    if (st == MilpSolution::Status::Infeasible) {
      sol.gap = 0.0;
    } else {
      sol.gap = (global_bound_ - incumbent_) / std::max(1.0, std::fabs(incumbent_));
    }
    {
      std::lock_guard<std::mutex> g(trace_mutex_);
      trace_.push_back({clock.elapsed_s(), incumbent_, global_bound_});
      sol.trace = trace_;
    }
    sol.solve_seconds = clock.elapsed_s();
  }
};

inline MilpSolution solve_milp(const MilpModel& model, const SolverConfig& config, CompletionHook hook = nullptr) {
  BranchAndBound bb(model, config, std::move(hook));
  return bb.solve();
}

}  // namespace rankmip
