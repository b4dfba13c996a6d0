#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rnncert/ids.hpp"
#include "rnncert/network.hpp"
#include "rnncert/solver.hpp"

namespace rnncert {

enum class Rel : uint8_t { LessEq, GreaterEq, Equal };

/// Sparse linear expression over property variables.
struct LinExpr {
  std::map<VarId, double> terms;
  double constant = 0.0;

  LinExpr& add(VarId v, double coef) {
    terms[v] += coef;
    return *this;
  }
  double coef(VarId v) const {
    auto it = terms.find(v);
    return it == terms.end() ? 0.0 : it->second;
  }
  double evaluate(const std::map<VarId, double>& assignment) const;
};

/// Stored normalized as `expr rel 0`.
struct LinConstraint {
  LinExpr lhs;
  Rel rel = Rel::LessEq;

  /// Builds `expr rel rhs`, folding rhs into the normalized form.
  static LinConstraint make(LinExpr expr, Rel rel, double rhs) {
    expr.constant -= rhs;
    return LinConstraint{std::move(expr), rel};
  }
  bool satisfied(const std::map<VarId, double>& assignment, double tol = 1e-9) const;
};

/// Single-variable convenience bounds: lo <= var <= hi.
std::vector<LinConstraint> box_constraints(VarId var, double lo, double hi);

struct InputProperty {
  std::vector<LinConstraint> constraints;  // conjunction over inputs and t
};

enum class TimeScope : uint8_t { AnyStep, FixedStep };

struct OutputProperty {
  std::vector<std::vector<LinConstraint>> disjuncts;  // each a conjunction
  TimeScope scope = TimeScope::AnyStep;
  int fixed_step = 0;  // meaningful for FixedStep

  static OutputProperty any_step(std::vector<std::vector<LinConstraint>> d) {
    return {std::move(d), TimeScope::AnyStep, 0};
  }
  static OutputProperty fixed(std::vector<std::vector<LinConstraint>> d, int t0) {
    return {std::move(d), TimeScope::FixedStep, t0};
  }
};

struct RnnQuery {
  InputProperty P;
  std::shared_ptr<const RnnNetwork> N;
  OutputProperty Q;
  int t_max = 1;

  RnnQuery(InputProperty p, std::shared_ptr<const RnnNetwork> n, OutputProperty q, int tmax);
};

/// Linear constraint over concrete neuron positions of one FFNN.
struct NeuronTerm {
  NeuronRef neuron;
  double coef;
};
struct NeuronConstraint {
  std::vector<NeuronTerm> terms;
  double constant = 0.0;
  Rel rel = Rel::LessEq;
};

/// Feed-forward verification query: conjunction P over (mostly input)
/// variables, one Q disjunct, and the binding that names neurons.
struct FfnnQuery {
  std::shared_ptr<const FfnnNetwork> net;
  std::vector<LinConstraint> P;
  std::vector<LinConstraint> Q;
  std::map<VarId, NeuronRef> binding;

  std::vector<NeuronConstraint> lowered() const;
};

/// Variable binding for a plain feed-forward network (inputs on layer 0,
/// outputs on the last layer, hidden(i,j) on layer i).
std::map<VarId, NeuronRef> plain_ffnn_binding(const FfnnNetwork& net);
std::map<VarId, NeuronRef> snapshot_binding(const SnapshotNetwork& snap, const RnnNetwork& net);

/// Substitutes the time variable: coefficients of t are folded into the
/// constants. `t` must lie in [1, t_max].
LinConstraint instantiate_at(const LinConstraint& c, int t, int t_max);
std::vector<LinConstraint> instantiate_at(const std::vector<LinConstraint>& cs, int t, int t_max);

/// Conservative non-strict negation of an inequality (equalities rejected).
LinConstraint negate_bound(const LinConstraint& c);

struct Interval {
  double lo = -solver::kInf;
  double hi = solver::kInf;
  bool contains(double v, double tol = 1e-9) const { return v >= lo - tol && v <= hi + tol; }
};

struct Box {
  std::map<VarId, Interval> intervals;
  bool infeasible = false;  // the constraint set itself has no solutions
};

/// Tightest per-variable intervals containing every satisfying assignment,
/// computed by LP over the constraints. Throws UnboundedVariableError if a
/// variable admits arbitrarily large values (big-M encoding impossible).
Box derive_box(const std::vector<LinConstraint>& constraints,
               std::optional<std::pair<double, double>> t_range);

struct LinearInvariant {
  int layer = 0;  // 1-based
  int unit = 0;
  double alpha_l = 0.0;
  double alpha_u = 0.0;
};

struct InvariantSet {
  std::vector<LinearInvariant> invariants;  // at most one per memory unit

  const LinearInvariant* find(int layer, int unit) const;
  LinearInvariant* find(int layer, int unit);
  void set(LinearInvariant inv);
  bool covers_layer(const RnnNetwork& net, int layer) const;
  /// Membership constraints over memory variables and t.
  std::vector<LinConstraint> constraints() const;
};

enum class VerdictKind : uint8_t { Holds, Violated, Unknown, Error };

struct PhaseTimings {
  double inference_s = 0.0;
  double phi_checks_s = 0.0;
  double snapshot_query_s = 0.0;
  double total_s = 0.0;
  double engine_fraction() const {
    return total_s > 0 ? (phi_checks_s + snapshot_query_s) / total_s : 0.0;
  }
};

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  std::optional<RnnTrace> witness;  // set for Violated
  int violated_step = 0;            // 1-based step where Q holds
  std::string reason;
  std::optional<InvariantSet> invariants_used;
};

const char* to_string(VerdictKind k);

}  // namespace rnncert
