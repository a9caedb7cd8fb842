#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rankmip/common.hpp"

namespace rankmip {

enum class VarKind { Continuous, Binary, Integer };
enum class RowSense { LessEqual, GreaterEqual, Equal };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lb = 0.0;
  double ub = 0.0;
};

struct LinearTerm {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<LinearTerm> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

// Solver-agnostic MILP: maximize objective over linear constraints and
// variable bounds. objective_offset carries the constant dropped from the
// model objective (|S+| a_1 for the CLRS builds) so reported objectives are
// directly comparable with list evaluation.
struct MilpModel {
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<LinearTerm> objective;  // maximize
  double objective_offset = 0.0;

  // metadata
  std::string formulation;
  double epsilon = 0.0;
  double reg_c = 0.0;
  int head_k = 0;
  std::vector<std::string> build_warnings;

  int add_variable(std::string name, VarKind kind, double lb, double ub) {
    variables.push_back({std::move(name), kind, lb, ub});
    return static_cast<int>(variables.size()) - 1;
  }

  void add_constraint(std::string name, std::vector<LinearTerm> terms, RowSense sense, double rhs) {
    constraints.push_back({std::move(name), std::move(terms), sense, rhs});
  }

  void add_objective_term(int var, double coef) { objective.push_back({var, coef}); }

  int num_variables() const { return static_cast<int>(variables.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }

  int find_variable(const std::string& name) const {
    for (int j = 0; j < num_variables(); ++j) {
      if (variables[j].name == name) return j;
    }
    return -1;
  }

  double objective_value(const std::vector<double>& x) const {
    double v = objective_offset;
    for (const auto& t : objective) v += t.coef * x[t.var];
    return v;
  }

  void validate() const {
    for (const auto& v : variables) {
      if (!std::isfinite(v.lb) || !std::isfinite(v.ub) || v.lb > v.ub)
        throw ValidationError("variable " + v.name + " has invalid bounds");
      if (v.kind == VarKind::Binary && (v.lb < 0.0 || v.ub > 1.0))
        throw ValidationError("binary variable " + v.name + " must have bounds within [0,1]");
    }
    auto check_terms = [&](const std::vector<LinearTerm>& terms, const std::string& where) {
      for (const auto& t : terms) {
        if (t.var < 0 || t.var >= num_variables())
          throw ValidationError(where + " references undeclared variable index " + std::to_string(t.var));
        if (!std::isfinite(t.coef)) throw ValidationError(where + " has non-finite coefficient");
      }
    };
    for (const auto& c : constraints) {
      check_terms(c.terms, "constraint " + c.name);
      if (!std::isfinite(c.rhs)) throw ValidationError("constraint " + c.name + " has non-finite rhs");
    }
    check_terms(objective, "objective");
  }

  // Count variables whose name starts with the given prefix (used by the
  // model-size checks; names are deterministic).
  int count_variables_with_prefix(const std::string& prefix) const {
    int c = 0;
    for (const auto& v : variables) {
      if (v.name.rfind(prefix, 0) == 0) ++c;
    }
    return c;
  }

  // Plain-text LP-style dump: deterministic line order, one constraint per
  // line. Format: docs/lp_format.md.
  std::string to_lp_text() const {
    std::ostringstream os;
    char buf[64];
    auto num = [&](double v) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      return std::string(buf);
    };
    os << "\\ formulation: " << (formulation.empty() ? "none" : formulation)
       << " epsilon: " << num(epsilon) << " C: " << num(reg_c)
       << " offset: " << num(objective_offset) << "\n";
    os << "Maximize\n obj:";
    for (const auto& t : objective) {
      os << (t.coef >= 0 ? " + " : " - ") << num(std::fabs(t.coef)) << " " << variables[t.var].name;
    }
    os << "\nSubject To\n";
    for (const auto& c : constraints) {
      os << " " << c.name << ":";
      for (const auto& t : c.terms) {
        os << (t.coef >= 0 ? " + " : " - ") << num(std::fabs(t.coef)) << " " << variables[t.var].name;
      }
      const char* op = c.sense == RowSense::LessEqual ? "<=" : c.sense == RowSense::GreaterEqual ? ">=" : "=";
      os << " " << op << " " << num(c.rhs) << "\n";
    }
    os << "Bounds\n";
    for (const auto& v : variables) {
      os << " " << num(v.lb) << " <= " << v.name << " <= " << num(v.ub) << "\n";
    }
    bool any_bin = false, any_int = false;
    for (const auto& v : variables) {
      any_bin |= v.kind == VarKind::Binary;
      any_int |= v.kind == VarKind::Integer;
    }
    if (any_bin) {
      os << "Binaries\n";
      for (const auto& v : variables) {
        if (v.kind == VarKind::Binary) os << " " << v.name;
      }
      os << "\n";
    }
    if (any_int) {
      os << "Generals\n";
      for (const auto& v : variables) {
        if (v.kind == VarKind::Integer) os << " " << v.name;
      }
      os << "\n";
    }
    os << "End\n";
    return os.str();
  }
};

}  // namespace rankmip
