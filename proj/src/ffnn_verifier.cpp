#include "rnncert/ffnn_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace rnncert {

const char* to_string(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::Sat: return "sat";
    case VerifyStatus::Unsat: return "unsat";
    case VerifyStatus::Budget: return "budget";
    case VerifyStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

NeuronBounds propagate_bounds(const FfnnNetwork& net, const std::vector<Interval>& input_box) {
  if (static_cast<int>(input_box.size()) != net.input_dim())
    throw StructureError("propagate_bounds: box size mismatch");
  for (const auto& iv : input_box)
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
      throw StructureError("propagate_bounds: input box must be finite");

  NeuronBounds nb;
  nb.pre.resize(net.num_layers() + 1);
  nb.post.resize(net.num_layers() + 1);
  nb.pre[0] = input_box;
  nb.post[0] = input_box;
  for (int l = 1; l <= net.num_layers(); ++l) {
    const FfnnLayer& layer = net.layer(l);
    nb.pre[l].resize(layer.size());
    nb.post[l].resize(layer.size());
    for (int j = 0; j < layer.size(); ++j) {
      double lo = layer.bias[j], hi = layer.bias[j];
      for (const auto& in : layer.incoming) {
        for (int c = 0; c < in.W.cols(); ++c) {
          double w = in.W(j, c);
          if (w == 0.0) continue;
          const Interval& src = nb.post[in.source][c];
          if (w > 0) {
            lo += w * src.lo;
            hi += w * src.hi;
          } else {
            lo += w * src.hi;
            hi += w * src.lo;
          }
        }
      }
      nb.pre[l][j] = {lo, hi};
      if (layer.activation == Activation::ReLU)
        nb.post[l][j] = {std::max(0.0, lo), std::max(0.0, hi)};
      else
        nb.post[l][j] = {lo, hi};
    }
  }
  return nb;
}

namespace {

struct InputBoxResult {
  std::vector<Interval> box;
  bool infeasible = false;
};

/// Tightest per-input intervals implied by the constraints that only mention
/// layer-0 neurons. Every input must end up with finite bounds.
InputBoxResult input_box_from_constraints(const FfnnNetwork& net,
                                          const std::vector<NeuronConstraint>& constraints,
                                          const solver::Tolerances& tol) {
  solver::LpProblem lp;
  for (int k = 0; k < net.input_dim(); ++k) lp.add_variable(-solver::kInf, solver::kInf);
  for (const auto& c : constraints) {
    bool inputs_only = true;
    for (const auto& t : c.terms)
      if (t.neuron.layer != 0) inputs_only = false;
    if (!inputs_only) continue;
    solver::Row row;
    for (const auto& t : c.terms) row.terms.push_back({t.neuron.index, t.coef});
    row.rhs = -c.constant;
    row.rel = c.rel == Rel::LessEq ? solver::Relation::LessEq
              : c.rel == Rel::GreaterEq ? solver::Relation::GreaterEq
                                        : solver::Relation::Equal;
    lp.rows.push_back(std::move(row));
  }

  InputBoxResult out;
  out.box.resize(net.input_dim());
  lp.objective.assign(lp.num_vars(), 0.0);
  for (int k = 0; k < net.input_dim(); ++k) {
    for (bool maximize : {false, true}) {
      std::fill(lp.objective.begin(), lp.objective.end(), 0.0);
      lp.objective[k] = 1.0;
      lp.maximize = maximize;
      auto r = solver::solve_lp(lp, tol);
      if (r.status == solver::SolveStatus::Infeasible) {
        out.infeasible = true;
        return out;
      }
      if (r.status == solver::SolveStatus::Unbounded)
        throw UnboundedVariableError(VarId::input(k));
      if (r.status != solver::SolveStatus::Optimal)
        throw StructureError("input box derivation failed");
      (maximize ? out.box[k].hi : out.box[k].lo) = r.objective;
    }
  }
  return out;
}

struct Encoding {
  solver::MilpProblem milp;
  std::vector<std::vector<int>> post_var;   // [layer][idx]
  std::vector<std::vector<int>> pre_var;    // [layer][idx], -1 where fused
  std::vector<std::pair<int, int>> unstable;  // (layer, idx)
};

/// One variable per neuron value; pre-activation variables only where a
/// big-M split is required.
Encoding build_base_encoding(const FfnnNetwork& net, const NeuronBounds& nb) {
  Encoding enc;
  auto& lp = enc.milp.lp;
  enc.post_var.resize(net.num_layers() + 1);
  enc.pre_var.resize(net.num_layers() + 1);
  enc.post_var[0].resize(net.input_dim());
  enc.pre_var[0].assign(net.input_dim(), -1);
  for (int k = 0; k < net.input_dim(); ++k)
    enc.post_var[0][k] = lp.add_variable(nb.post[0][k].lo, nb.post[0][k].hi);

  for (int l = 1; l <= net.num_layers(); ++l) {
    const FfnnLayer& layer = net.layer(l);
    enc.post_var[l].resize(layer.size());
    enc.pre_var[l].assign(layer.size(), -1);
    for (int j = 0; j < layer.size(); ++j) {
      const Interval& pre = nb.pre[l][j];
      const Interval& post = nb.post[l][j];
      bool relu = layer.activation == Activation::ReLU;
      bool unstable = relu && pre.lo < 0.0 && pre.hi > 0.0;

      auto affine_row = [&](int target, double rhs_shift) {
        // target = sum_in W * post(source) + bias  (rearranged to a row)
        solver::Row row;
        row.terms.push_back({target, 1.0});
        for (const auto& in : layer.incoming)
          for (int c = 0; c < in.W.cols(); ++c)
            if (in.W(j, c) != 0.0) row.terms.push_back({enc.post_var[in.source][c], -in.W(j, c)});
        row.rel = solver::Relation::Equal;
        row.rhs = layer.bias[j] + rhs_shift;
        lp.rows.push_back(std::move(row));
      };

      if (!relu) {
        int y = lp.add_variable(pre.lo, pre.hi);
        enc.post_var[l][j] = y;
        affine_row(y, 0.0);
      } else if (!unstable) {
        if (pre.hi <= 0.0) {
          enc.post_var[l][j] = lp.add_variable(0.0, 0.0);
        } else {
          int y = lp.add_variable(std::max(0.0, pre.lo), std::max(0.0, pre.hi));
          enc.post_var[l][j] = y;
          affine_row(y, 0.0);
        }
      } else {
        int x = lp.add_variable(pre.lo, pre.hi);
        int y = lp.add_variable(post.lo, post.hi);
        enc.pre_var[l][j] = x;
        enc.post_var[l][j] = y;
        affine_row(x, 0.0);
        enc.unstable.push_back({l, j});
      }
    }
  }
  return enc;
}

void add_neuron_constraints(solver::LpProblem& lp, const Encoding& enc,
                            const std::vector<NeuronConstraint>& constraints) {
  for (const auto& c : constraints) {
    solver::Row row;
    for (const auto& t : c.terms) {
      if (t.neuron.layer < 0 || t.neuron.layer >= static_cast<int>(enc.post_var.size()) ||
          t.neuron.index < 0 ||
          t.neuron.index >= static_cast<int>(enc.post_var[t.neuron.layer].size()))
        throw StructureError("constraint references a neuron outside the network");
      row.terms.push_back({enc.post_var[t.neuron.layer][t.neuron.index], t.coef});
    }
    row.rhs = -c.constant;
    row.rel = c.rel == Rel::LessEq ? solver::Relation::LessEq
              : c.rel == Rel::GreaterEq ? solver::Relation::GreaterEq
                                        : solver::Relation::Equal;
    lp.rows.push_back(std::move(row));
  }
}

bool check_constraints(const std::vector<Vector>& values,
                       const std::vector<NeuronConstraint>& constraints, double tol) {
  for (const auto& c : constraints) {
    double v = c.constant;
    for (const auto& t : c.terms) v += t.coef * values[t.neuron.layer][t.neuron.index];
    switch (c.rel) {
      case Rel::LessEq:
        if (v > tol) return false;
        break;
      case Rel::GreaterEq:
        if (v < -tol) return false;
        break;
      case Rel::Equal:
        if (std::fabs(v) > tol) return false;
        break;
    }
  }
  return true;
}

VerifyResult finish_sat(const FfnnNetwork& net,
                        const std::vector<NeuronConstraint>& constraints,
                        const std::vector<double>& assignment,
                        const std::vector<std::vector<int>>& post_var) {
  VerifyResult res;
  res.status = VerifyStatus::Sat;
  Vector input(net.input_dim());
  for (int k = 0; k < net.input_dim(); ++k) input[k] = assignment[post_var[0][k]];
  res.witness = net.evaluate_all(input);
  res.replay_clean = check_constraints(res.witness, constraints, 1e-6);
  return res;
}

}  // namespace

VerifyResult verify(const FfnnNetwork& net, const std::vector<NeuronConstraint>& constraints,
                    const VerifierConfig& cfg) {
  auto boxed = input_box_from_constraints(net, constraints, cfg.tol);
  if (boxed.infeasible) {
    VerifyResult res;
    res.status = VerifyStatus::Unsat;
    return res;
  }
  NeuronBounds nb = propagate_bounds(net, boxed.box);
  Encoding enc = build_base_encoding(net, nb);
  for (auto [l, j] : enc.unstable)
    solver::encode_relu(enc.milp, enc.pre_var[l][j], enc.post_var[l][j], nb.pre[l][j].lo,
                        nb.pre[l][j].hi);
  add_neuron_constraints(enc.milp.lp, enc, constraints);

  if (!cfg.dump_lp_path.empty()) {
    std::ofstream f(cfg.dump_lp_path);
    solver::dump_lp(enc.milp.lp, f, enc.milp.binaries);
  }

  auto sol = solver::solve_milp(enc.milp, cfg.tol, cfg.budget);
  VerifyResult res;
  res.stats = sol.stats;
  switch (sol.status) {
    case solver::SolveStatus::Optimal: {
      VerifyResult sat = finish_sat(net, constraints, sol.assignment, enc.post_var);
      sat.stats = sol.stats;
      return sat;
    }
    case solver::SolveStatus::Infeasible: res.status = VerifyStatus::Unsat; break;
    case solver::SolveStatus::BudgetExceeded: res.status = VerifyStatus::Budget; break;
    default: res.status = VerifyStatus::NumericalFailure; break;
  }
  return res;
}

VerifyResult verify(const FfnnQuery& q, const VerifierConfig& cfg) {
  return verify(*q.net, q.lowered(), cfg);
}

VerifyResult verify_exhaustive(const FfnnNetwork& net,
                               const std::vector<NeuronConstraint>& constraints,
                               int max_unstable, const VerifierConfig& cfg) {
  auto boxed = input_box_from_constraints(net, constraints, cfg.tol);
  if (boxed.infeasible) {
    VerifyResult res;
    res.status = VerifyStatus::Unsat;
    return res;
  }
  NeuronBounds nb = propagate_bounds(net, boxed.box);
  Encoding base = build_base_encoding(net, nb);
  int k = static_cast<int>(base.unstable.size());
  if (k > max_unstable)
    throw StructureError("verify_exhaustive: " + std::to_string(k) + " unstable relus exceed " +
                         std::to_string(max_unstable));

  VerifyResult res;
  for (uint64_t pattern = 0; pattern < (1ULL << k); ++pattern) {
    Encoding enc = base;
    auto& lp = enc.milp.lp;
    for (int i = 0; i < k; ++i) {
      auto [l, j] = enc.unstable[i];
      int x = enc.pre_var[l][j];
      int y = enc.post_var[l][j];
      if ((pattern >> i) & 1) {
        lp.lower[x] = std::max(lp.lower[x], 0.0);
        lp.add_row({{y, 1.0}, {x, -1.0}}, solver::Relation::Equal, 0.0);
      } else {
        lp.upper[x] = std::min(lp.upper[x], 0.0);
        lp.lower[y] = 0.0;
        lp.upper[y] = 0.0;
      }
    }
    add_neuron_constraints(lp, enc, constraints);
    auto sol = solver::solve_lp(lp, cfg.tol, cfg.budget);
    res.stats.pivots += sol.stats.pivots;
    if (sol.status == solver::SolveStatus::Optimal) {
      VerifyResult sat = finish_sat(net, constraints, sol.assignment, enc.post_var);
      sat.stats = res.stats;
      return sat;
    }
    if (sol.status == solver::SolveStatus::BudgetExceeded) {
      res.status = VerifyStatus::Budget;
      return res;
    }
    if (sol.status == solver::SolveStatus::NumericalFailure) {
      res.status = VerifyStatus::NumericalFailure;
      return res;
    }
  }
  res.status = VerifyStatus::Unsat;
  return res;
}

VerifyResult verify_exhaustive(const FfnnQuery& q, int max_unstable, const VerifierConfig& cfg) {
  return verify_exhaustive(*q.net, q.lowered(), max_unstable, cfg);
}

}  // namespace rnncert
