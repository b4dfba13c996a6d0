#include "rnncert/props.hpp"

#include <algorithm>
#include <cmath>

namespace rnncert {

double LinExpr::evaluate(const std::map<VarId, double>& assignment) const {
  double v = constant;
  for (const auto& [var, coef] : terms) {
    auto it = assignment.find(var);
    if (it == assignment.end()) throw StructureError("unassigned variable " + var.to_string());
    v += coef * it->second;
  }
  return v;
}

bool LinConstraint::satisfied(const std::map<VarId, double>& assignment, double tol) const {
  double v = lhs.evaluate(assignment);
  switch (rel) {
    case Rel::LessEq: return v <= tol;
    case Rel::GreaterEq: return v >= -tol;
    case Rel::Equal: return std::fabs(v) <= tol;
  }
  return false;
}

std::vector<LinConstraint> box_constraints(VarId var, double lo, double hi) {
  LinExpr e1, e2;
  e1.add(var, 1.0);
  e2.add(var, 1.0);
  return {LinConstraint::make(e1, Rel::GreaterEq, lo), LinConstraint::make(e2, Rel::LessEq, hi)};
}

RnnQuery::RnnQuery(InputProperty p, std::shared_ptr<const RnnNetwork> n, OutputProperty q,
                   int tmax)
    : P(std::move(p)), N(std::move(n)), Q(std::move(q)), t_max(tmax) {
  if (!N) throw StructureError("query without a network");
  if (t_max < 1) throw StructureError("t_max must be >= 1");
  if (Q.disjuncts.empty()) throw StructureError("output property must be non-empty");
  if (Q.scope == TimeScope::FixedStep && (Q.fixed_step < 1 || Q.fixed_step > t_max))
    throw StructureError("fixed time step outside [1, t_max]");
}

std::vector<NeuronConstraint> FfnnQuery::lowered() const {
  std::vector<NeuronConstraint> out;
  auto lower_one = [&](const LinConstraint& c) {
    NeuronConstraint nc;
    nc.constant = c.lhs.constant;
    nc.rel = c.rel;
    for (const auto& [var, coef] : c.lhs.terms) {
      auto it = binding.find(var);
      if (it == binding.end())
        throw StructureError("no binding for variable " + var.to_string());
      nc.terms.push_back({it->second, coef});
    }
    out.push_back(std::move(nc));
  };
  for (const auto& c : P) lower_one(c);
  for (const auto& c : Q) lower_one(c);
  return out;
}

std::map<VarId, NeuronRef> plain_ffnn_binding(const FfnnNetwork& net) {
  std::map<VarId, NeuronRef> b;
  for (int k = 0; k < net.input_dim(); ++k) b[VarId::input(k)] = {0, k};
  int last = net.num_layers();
  for (int k = 0; k < net.output_dim(); ++k) b[VarId::output(k)] = {last, k};
  for (int i = 1; i <= last; ++i)
    for (int j = 0; j < net.layer_size(i); ++j) b[VarId::hidden(i, j)] = {i, j};
  return b;
}

std::map<VarId, NeuronRef> snapshot_binding(const SnapshotNetwork& snap, const RnnNetwork& net) {
  std::map<VarId, NeuronRef> b;
  b[VarId::time()] = snap.resolve(VarId::time());
  for (int k = 0; k < net.input_dim(); ++k) b[VarId::input(k)] = snap.resolve(VarId::input(k));
  for (const auto& [key, pos] : snap.memory_vars)
    b[VarId::memory(key.first, key.second)] = {0, pos};
  for (int i = 1; i <= snap.rnn_layers; ++i)
    for (int j = 0; j < net.layer(i - 1).size(); ++j) b[VarId::hidden(i, j)] = {i, j};
  if (snap.rnn_layers == net.num_layers())
    for (int k = 0; k < net.output_dim(); ++k)
      b[VarId::output(k)] = {snap.rnn_layers, k};
  return b;
}

LinConstraint instantiate_at(const LinConstraint& c, int t, int t_max) {
  if (t < 1 || t > t_max)
    throw StructureError("time step " + std::to_string(t) + " outside [1, " +
                         std::to_string(t_max) + "]");
  LinConstraint out = c;
  auto it = out.lhs.terms.find(VarId::time());
  if (it != out.lhs.terms.end()) {
    out.lhs.constant += it->second * t;
    out.lhs.terms.erase(it);
  }
  return out;
}

std::vector<LinConstraint> instantiate_at(const std::vector<LinConstraint>& cs, int t,
                                          int t_max) {
  std::vector<LinConstraint> out;
  out.reserve(cs.size());
  for (const auto& c : cs) out.push_back(instantiate_at(c, t, t_max));
  return out;
}

LinConstraint negate_bound(const LinConstraint& c) {
  if (c.rel == Rel::Equal) throw StructureError("cannot negate an equality constraint");
  LinConstraint out = c;
  out.rel = c.rel == Rel::LessEq ? Rel::GreaterEq : Rel::LessEq;
  return out;
}

Box derive_box(const std::vector<LinConstraint>& constraints,
               std::optional<std::pair<double, double>> t_range) {
  std::map<VarId, int> var_index;
  auto touch = [&](VarId v) {
    if (!var_index.count(v)) var_index[v] = 0;
  };
  for (const auto& c : constraints)
    for (const auto& [var, coef] : c.lhs.terms) touch(var);
  if (t_range) touch(VarId::time());

  solver::LpProblem lp;
  for (auto& [var, idx] : var_index) {
    double lo = -solver::kInf, hi = solver::kInf;
    if (var == VarId::time() && t_range) {
      lo = t_range->first;
      hi = t_range->second;
    }
    idx = lp.add_variable(lo, hi, var.to_string());
  }
  for (const auto& c : constraints) {
    solver::Row row;
    for (const auto& [var, coef] : c.lhs.terms) row.terms.push_back({var_index[var], coef});
    row.rhs = -c.lhs.constant;
    switch (c.rel) {
      case Rel::LessEq: row.rel = solver::Relation::LessEq; break;
      case Rel::GreaterEq: row.rel = solver::Relation::GreaterEq; break;
      case Rel::Equal: row.rel = solver::Relation::Equal; break;
    }
    lp.rows.push_back(std::move(row));
  }

  Box box;
  lp.objective.assign(lp.num_vars(), 0.0);
  for (const auto& [var, idx] : var_index) {
    Interval iv;
    for (bool maximize : {false, true}) {
      std::fill(lp.objective.begin(), lp.objective.end(), 0.0);
      lp.objective[idx] = 1.0;
      lp.maximize = maximize;
      auto r = solver::solve_lp(lp);
      if (r.status == solver::SolveStatus::Infeasible) {
        box.infeasible = true;
        return box;
      }
      if (r.status == solver::SolveStatus::Unbounded) throw UnboundedVariableError(var);
      if (r.status != solver::SolveStatus::Optimal)
        throw StructureError("bound derivation failed: " + std::string(to_string(r.status)));
      (maximize ? iv.hi : iv.lo) = r.objective;
    }
    box.intervals[var] = iv;
  }
  return box;
}

const LinearInvariant* InvariantSet::find(int layer, int unit) const {
  for (const auto& inv : invariants)
    if (inv.layer == layer && inv.unit == unit) return &inv;
  return nullptr;
}

LinearInvariant* InvariantSet::find(int layer, int unit) {
  for (auto& inv : invariants)
    if (inv.layer == layer && inv.unit == unit) return &inv;
  return nullptr;
}

void InvariantSet::set(LinearInvariant inv) {
  if (inv.alpha_l > inv.alpha_u) throw StructureError("invariant with alpha_l > alpha_u");
  if (auto* existing = find(inv.layer, inv.unit)) {
    *existing = inv;
    return;
  }
  invariants.push_back(inv);
}

bool InvariantSet::covers_layer(const RnnNetwork& net, int layer) const {
  if (!net.layer(layer - 1).has_memory()) return true;
  for (int j = 0; j < net.layer(layer - 1).size(); ++j)
    if (!find(layer, j)) return false;
  return true;
}

std::vector<LinConstraint> InvariantSet::constraints() const {
  std::vector<LinConstraint> out;
  for (const auto& inv : invariants) {
    VarId mem = VarId::memory(inv.layer, inv.unit);
    // alpha_l (t-1) <= v^m <= alpha_u (t-1)
    LinExpr up;
    up.add(mem, 1.0).add(VarId::time(), -inv.alpha_u);
    up.constant = inv.alpha_u;
    out.push_back(LinConstraint{up, Rel::LessEq});
    LinExpr lo;
    lo.add(mem, 1.0).add(VarId::time(), -inv.alpha_l);
    lo.constant = inv.alpha_l;
    out.push_back(LinConstraint{lo, Rel::GreaterEq});
  }
  return out;
}

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Holds: return "holds";
    case VerdictKind::Violated: return "violated";
    case VerdictKind::Unknown: return "unknown";
    case VerdictKind::Error: return "error";
  }
  return "?";
}

}  // namespace rnncert
