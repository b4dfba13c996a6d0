#include "rnncert/invariant_engine.hpp"

#include <algorithm>
#include <cmath>

namespace rnncert {

namespace {

void enter_phase(const PhaseSink& sink, int phase) {
  if (sink.enter) sink.enter(phase);
}

std::vector<Interval> input_box(const RnnNetwork& net, const std::vector<LinConstraint>& cs,
                                std::optional<std::pair<double, double>> t_range) {
  Box box = derive_box(cs, t_range);
  std::vector<Interval> out(net.input_dim());
  if (box.infeasible) {
    for (auto& iv : out) iv = {0.0, 0.0};
    return out;
  }
  for (int k = 0; k < net.input_dim(); ++k) {
    auto it = box.intervals.find(VarId::input(k));
    if (it == box.intervals.end()) throw UnboundedVariableError(VarId::input(k));
    out[k] = it->second;
  }
  return out;
}

Interval memory_interval(const LinearInvariant& inv, int t) {
  double span = t - 1;
  return {inv.alpha_l * span, inv.alpha_u * span};
}

}  // namespace

std::vector<Interval> affine_bounds(const RnnNetwork& net, const InputProperty& P,
                                    const InvariantSet& proven, int layer, int t) {
  std::vector<Interval> cur = input_box(net, instantiate_at(P.constraints, t, t), {});
  for (int l = 1; l < layer; ++l) {
    const LayerWeights& lw = net.layer(l - 1);
    std::vector<Interval> next(lw.size());
    for (int j = 0; j < lw.size(); ++j) {
      double lo = lw.b[j], hi = lw.b[j];
      for (int c = 0; c < lw.W.cols(); ++c) {
        double w = lw.W(j, c);
        if (w > 0) {
          lo += w * cur[c].lo;
          hi += w * cur[c].hi;
        } else if (w < 0) {
          lo += w * cur[c].hi;
          hi += w * cur[c].lo;
        }
      }
      if (lw.has_memory()) {
        for (int k = 0; k < lw.size(); ++k) {
          double h = (*lw.H)(j, k);
          if (h == 0.0) continue;
          const LinearInvariant* inv = proven.find(l, k);
          if (!inv)
            throw StructureError("affine_bounds: no invariant for memory unit (" +
                                 std::to_string(l) + "," + std::to_string(k) + ")");
          Interval m = memory_interval(*inv, t);
          if (h > 0) {
            lo += h * m.lo;
            hi += h * m.hi;
          } else {
            lo += h * m.hi;
            hi += h * m.lo;
          }
        }
      }
      if (lw.activation == Activation::ReLU) {
        lo = std::max(0.0, lo);
        hi = std::max(0.0, hi);
      }
      next[j] = {lo, hi};
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<PhiQuery> build_phi_i(const RnnNetwork& net, const InputProperty& P,
                                  const InvariantSet& proven, const InvariantSet& candidate,
                                  int layer, int t_max) {
  if (layer < 1 || layer > net.num_layers() || !net.layer(layer - 1).has_memory())
    throw StructureError("build_phi_i: layer has no memory units");
  for (int l : net.memory_layers()) {
    if (l >= layer) break;
    if (!proven.covers_layer(net, l))
      throw StructureError("build_phi_i: memory layer " + std::to_string(l) +
                           " lacks a proven invariant");
  }
  int step_hi = t_max - 1;
  if (step_hi < 1) return {};  // only the (automatic) base case exists

  auto snap = std::make_shared<SnapshotNetwork>(snapshot(net, layer));
  auto shared_net = std::shared_ptr<const FfnnNetwork>(snap, &snap->ffnn);
  std::map<VarId, NeuronRef> binding = snapshot_binding(*snap, net);

  std::vector<LinConstraint> p_prime = P.constraints;
  auto t_box = box_constraints(VarId::time(), 1.0, static_cast<double>(step_hi));
  p_prime.insert(p_prime.end(), t_box.begin(), t_box.end());
  for (const auto& inv : proven.invariants) {
    if (inv.layer >= layer) continue;
    InvariantSet one;
    one.set(inv);
    auto cs = one.constraints();
    p_prime.insert(p_prime.end(), cs.begin(), cs.end());
  }
  std::vector<LinConstraint> cand_cs;
  for (const auto& inv : candidate.invariants) {
    if (inv.layer != layer) continue;
    InvariantSet one;
    one.set(inv);
    auto cs = one.constraints();
    cand_cs.insert(cand_cs.end(), cs.begin(), cs.end());
  }
  p_prime.insert(p_prime.end(), cand_cs.begin(), cand_cs.end());

  bool relu_layer = net.layer(layer - 1).activation == Activation::ReLU;

  std::vector<PhiQuery> queries;
  for (int j = 0; j < net.layer(layer - 1).size(); ++j) {
    const LinearInvariant* inv = candidate.find(layer, j);
    if (!inv) throw StructureError("build_phi_i: candidate misses a unit");
    // Upper step conclusion v <= alpha_u t, negated (non-strict) to v >= alpha_u t.
    {
      LinExpr e;
      e.add(VarId::hidden(layer, j), 1.0).add(VarId::time(), -inv->alpha_u);
      PhiQuery pq;
      pq.layer = layer;
      pq.unit = j;
      pq.direction = BoundDirection::Upper;
      pq.query = FfnnQuery{shared_net, p_prime,
                           {negate_bound(LinConstraint{e, Rel::LessEq})}, binding};
      queries.push_back(std::move(pq));
    }
    // Lower step conclusion v >= alpha_l t. For relu layers with alpha_l <= 0
    // the conclusion is implied structurally (post-activation values are
    // non-negative), so there is nothing to dispatch.
    if (!(relu_layer && inv->alpha_l <= 0.0)) {
      LinExpr e;
      e.add(VarId::hidden(layer, j), 1.0).add(VarId::time(), -inv->alpha_l);
      PhiQuery pq;
      pq.layer = layer;
      pq.unit = j;
      pq.direction = BoundDirection::Lower;
      pq.query = FfnnQuery{shared_net, p_prime,
                           {negate_bound(LinConstraint{e, Rel::GreaterEq})}, binding};
      queries.push_back(std::move(pq));
    }
  }
  return queries;
}

CheckOutcome check_invariant(const std::vector<PhiQuery>& queries, const VerifierConfig& cfg) {
  for (const auto& pq : queries) {
    VerifyResult r = verify(pq.query, cfg);
    switch (r.status) {
      case VerifyStatus::Unsat: continue;
      case VerifyStatus::Sat:
        return {CheckOutcome::Kind::Refuted, pq.layer, pq.unit, pq.direction,
                std::move(r.witness)};
      case VerifyStatus::Budget:
        return {CheckOutcome::Kind::Budget, pq.layer, pq.unit, pq.direction, {}};
      case VerifyStatus::NumericalFailure:
        return {CheckOutcome::Kind::Failure, pq.layer, pq.unit, pq.direction, {}};
    }
  }
  return {CheckOutcome::Kind::Certified, 0, 0, BoundDirection::Upper, {}};
}

double compute_search_bound(const RnnNetwork& net, const InputProperty& P, int t_max,
                            const EngineConfig& cfg) {
  std::vector<Interval> box =
      input_box(net, P.constraints, std::pair{1.0, static_cast<double>(t_max)});
  FfnnNetwork mem_free = memory_free_ffnn(net);
  NeuronBounds nb = propagate_bounds(mem_free, box);
  double ub = 0.0;
  bool any_memory = false;
  for (int l : net.memory_layers()) {
    any_memory = true;
    for (const auto& iv : nb.post[l]) ub = std::max(ub, iv.hi);
  }
  if (!any_memory)
    for (const auto& layer : nb.post)
      for (const auto& iv : layer) ub = std::max(ub, iv.hi);
  return std::clamp(ub * t_max, cfg.m_floor, cfg.m_cap);
}

SnapshotQueryResult solve_snapshot_query(const RnnNetwork& net, const InputProperty& P,
                                         const OutputProperty& Q, int t_max,
                                         const InvariantSet& invariants,
                                         const SnapshotNetwork& snap, const VerifierConfig& cfg,
                                         const std::function<void()>& on_query) {
  std::vector<LinConstraint> p_hat = P.constraints;
  double t_lo = 1.0, t_hi = static_cast<double>(t_max);
  if (Q.scope == TimeScope::FixedStep) t_lo = t_hi = Q.fixed_step;
  auto t_box = box_constraints(VarId::time(), t_lo, t_hi);
  p_hat.insert(p_hat.end(), t_box.begin(), t_box.end());
  auto inv_cs = invariants.constraints();
  p_hat.insert(p_hat.end(), inv_cs.begin(), inv_cs.end());

  auto shared_net = std::shared_ptr<const FfnnNetwork>(std::shared_ptr<const void>(), &snap.ffnn);
  std::map<VarId, NeuronRef> binding = snapshot_binding(snap, net);

  SnapshotQueryResult out;
  out.snap = &snap;
  for (const auto& disjunct : Q.disjuncts) {
    if (on_query) on_query();
    FfnnQuery q{shared_net, p_hat, disjunct, binding};
    VerifyResult r = verify(q, cfg);
    if (r.status == VerifyStatus::Sat) {
      out.status = VerifyStatus::Sat;
      out.witness = std::move(r.witness);
      return out;
    }
    if (r.status != VerifyStatus::Unsat) {
      out.status = r.status;
      return out;
    }
  }
  out.status = VerifyStatus::Unsat;
  return out;
}

AlgResult alg1(const RnnQuery& q, double m, const EngineConfig& cfg, const PhaseSink& phases) {
  const RnnNetwork& net = *q.N;
  auto mem_layers = net.memory_layers();
  if (mem_layers.size() != 1 || net.layer(mem_layers[0] - 1).size() != 1)
    throw StructureError("alg1 requires exactly one memory unit");
  int layer = mem_layers[0];
  if (net.layer(layer - 1).activation != Activation::ReLU)
    throw StructureError("alg1 requires a relu memory layer");

  SnapshotNetwork snap = snapshot(net);
  AlgResult res;
  double lb = -m, ub = m;
  while (ub - lb >= cfg.epsilon) {
    ++res.iterations;
    double alpha = (lb + ub) / 2.0;
    InvariantSet cand;
    cand.set({layer, 0, 0.0, alpha});

    enter_phase(phases, 1);
    auto queries = build_phi_i(net, q.P, {}, cand, layer, q.t_max);
    CheckOutcome chk = check_invariant(queries, cfg.verifier);
    enter_phase(phases, 0);
    if (chk.kind == CheckOutcome::Kind::Budget || chk.kind == CheckOutcome::Kind::Failure) {
      res.reason = "engine gave up while checking the invariant";
      res.budget_hit = true;
      return res;
    }
    if (chk.kind == CheckOutcome::Kind::Certified) {
      enter_phase(phases, 2);
      auto snap_res = solve_snapshot_query(net, q.P, q.Q, q.t_max, cand, snap, cfg.verifier);
      enter_phase(phases, 0);
      if (snap_res.status == VerifyStatus::Unsat) {
        res.holds = true;
        res.invariants = cand;
        return res;
      }
      if (snap_res.status != VerifyStatus::Sat) {
        res.reason = "engine gave up on the snapshot query";
        res.budget_hit = true;
        return res;
      }
      res.snapshot_witnesses.push_back(std::move(snap_res.witness));
      res.invariants = cand;  // certified but too weak so far
      ub = alpha;
    } else {
      lb = alpha;  // invariant too strong
    }
  }
  res.reason = "optimal linear invariant is insufficient";
  return res;
}

namespace {

/// Minimal interval-certifiable upper slope for a single-unit relu layer
/// given earlier layers' invariants; nullopt when no finite slope closes the
/// step obligation.
std::optional<double> minimal_chain_slope(const RnnNetwork& net, const InputProperty& P,
                                          const InvariantSet& earlier, int layer, int t_max) {
  const LayerWeights& lw = net.layer(layer - 1);
  double h = (*lw.H)(0, 0);
  double h_pos = std::max(h, 0.0);
  double needed = 0.0;
  for (int t = 1; t <= t_max - 1; ++t) {
    std::vector<Interval> prev = affine_bounds(net, P, earlier, layer, t);
    double c_hi = lw.b[0];
    for (int c = 0; c < lw.W.cols(); ++c) {
      double w = lw.W(0, c);
      c_hi += w * (w >= 0 ? prev[c].hi : prev[c].lo);
    }
    double denom = t - h_pos * (t - 1);
    if (denom <= 1e-9) return std::nullopt;
    needed = std::max(needed, std::max(0.0, c_hi) / denom);
  }
  return needed;
}

}  // namespace

AlgResult alg2(const RnnQuery& q, double m, const EngineConfig& cfg, const PhaseSink& phases) {
  const RnnNetwork& net = *q.N;
  auto mem_layers = net.memory_layers();
  if (mem_layers.empty()) throw StructureError("alg2 requires memory layers");
  for (int l : mem_layers) {
    if (net.layer(l - 1).size() != 1)
      throw StructureError("alg2 requires single-unit memory layers");
    if (net.layer(l - 1).activation != Activation::ReLU)
      throw StructureError("alg2 requires relu memory layers");
  }

  AlgResult res;
  SnapshotNetwork snap = snapshot(net);

  // Loose initial invariants. A fixed M*i ladder is inconsistent on chained
  // layers (deeper slopes must absorb the previous layer's slope times the
  // horizon), so the ladder is seeded from interval propagation instead and
  // then checked like any other candidate.
  InvariantSet current;
  std::vector<double> lb(mem_layers.size()), ub(mem_layers.size());
  for (size_t idx = 0; idx < mem_layers.size(); ++idx) {
    int layer = mem_layers[idx];
    auto slope = minimal_chain_slope(net, q.P, current, layer, q.t_max);
    if (!slope) {
      res.reason = "no finite loose invariant for layer " + std::to_string(layer);
      return res;
    }
    double init = std::max(2.0 * *slope + 1.0, m * static_cast<double>(idx + 1));
    current.set({layer, 0, 0.0, init});
    ub[idx] = init;
    lb[idx] = -init;

    enter_phase(phases, 1);
    InvariantSet earlier;
    for (size_t k = 0; k < idx; ++k) earlier.set(*current.find(mem_layers[k], 0));
    auto queries = build_phi_i(net, q.P, earlier, current, layer, q.t_max);
    CheckOutcome chk = check_invariant(queries, cfg.verifier);
    enter_phase(phases, 0);
    if (chk.kind != CheckOutcome::Kind::Certified) {
      res.budget_hit = chk.kind != CheckOutcome::Kind::Refuted;
      res.reason = "loose invariant failed for layer " + std::to_string(layer);
      return res;
    }
  }

  double max_range = 0.0;
  for (size_t idx = 0; idx < mem_layers.size(); ++idx)
    max_range = std::max(max_range, ub[idx] - lb[idx]);
  int max_outer = static_cast<int>(std::ceil(std::log2(std::max(2.0, max_range / cfg.epsilon)))) + 8;

  for (int outer = 0; outer < max_outer; ++outer) {
    ++res.iterations;
    enter_phase(phases, 2);
    auto snap_res = solve_snapshot_query(net, q.P, q.Q, q.t_max, current, snap, cfg.verifier);
    enter_phase(phases, 0);
    if (snap_res.status == VerifyStatus::Unsat) {
      res.holds = true;
      res.invariants = current;
      return res;
    }
    if (snap_res.status != VerifyStatus::Sat) {
      res.reason = "engine gave up on the snapshot query";
      res.budget_hit = true;
      res.invariants = current;
      return res;
    }
    res.snapshot_witnesses.push_back(std::move(snap_res.witness));

    bool progress = false;
    for (size_t idx = 0; idx < mem_layers.size(); ++idx) {
      if (ub[idx] - lb[idx] <= cfg.epsilon) continue;  // already optimal
      progress = true;
      int layer = mem_layers[idx];
      double alpha = (lb[idx] + ub[idx]) / 2.0;
      InvariantSet cand = current;
      cand.set({layer, 0, 0.0, alpha});
      InvariantSet earlier;
      for (size_t k = 0; k < idx; ++k) earlier.set(*current.find(mem_layers[k], 0));

      enter_phase(phases, 1);
      auto queries = build_phi_i(net, q.P, earlier, cand, layer, q.t_max);
      CheckOutcome chk = check_invariant(queries, cfg.verifier);
      enter_phase(phases, 0);
      if (chk.kind == CheckOutcome::Kind::Budget || chk.kind == CheckOutcome::Kind::Failure) {
        res.reason = "engine gave up while tightening layer " + std::to_string(layer);
        res.budget_hit = true;
        res.invariants = current;
        return res;
      }
      if (chk.kind == CheckOutcome::Kind::Certified) {
        current.set({layer, 0, 0.0, alpha});
        ub[idx] = alpha;
      } else {
        lb[idx] = alpha;
      }
    }
    if (!progress) {
      res.reason = "optimal invariants are too weak for the property";
      res.invariants = current;
      return res;
    }
  }
  res.reason = "iteration cap reached";
  res.invariants = current;
  return res;
}

namespace {

struct LayerMilp {
  solver::MilpProblem milp;
  std::vector<int> a_l, a_u;
};

LayerMilp build_layer_milp(const RnnNetwork& net, const InputProperty& P,
                           const InvariantSet& proven, int layer, int t_max,
                           const std::vector<int>& t_subset, double alpha_bound, double margin) {
  const LayerWeights& lw = net.layer(layer - 1);
  int units = lw.size();
  bool relu = lw.activation == Activation::ReLU;

  LayerMilp enc;
  auto& lp = enc.milp.lp;
  for (int j = 0; j < units; ++j) {
    enc.a_l.push_back(lp.add_variable(-alpha_bound, alpha_bound, "a_l" + std::to_string(j)));
    enc.a_u.push_back(lp.add_variable(-alpha_bound, alpha_bound, "a_u" + std::to_string(j)));
  }
  for (int j = 0; j < units; ++j)
    lp.add_row({{enc.a_l[j], 1.0}, {enc.a_u[j], -1.0}}, solver::Relation::LessEq, 0.0);

  for (int t : t_subset) {
    std::vector<Interval> prev = affine_bounds(net, P, proven, layer, t);
    double span = t - 1;
    for (int j = 0; j < units; ++j) {
      double c_lo = lw.b[j], c_hi = lw.b[j];
      for (int c = 0; c < lw.W.cols(); ++c) {
        double w = lw.W(j, c);
        if (w > 0) {
          c_hi += w * prev[c].hi;
          c_lo += w * prev[c].lo;
        } else if (w < 0) {
          c_hi += w * prev[c].lo;
          c_lo += w * prev[c].hi;
        }
      }
      // Memory contributions are linear in the alpha decision variables;
      // the sign of H picks which alpha bounds the worst case.
      std::vector<solver::LinearTerm> gamma_max, gamma_min;
      double gamma_abs = 0.0;
      for (int k = 0; k < units; ++k) {
        double h = (*lw.H)(j, k);
        if (h == 0.0 || span == 0.0) continue;
        double coef = h * span;
        gamma_max.push_back({h > 0 ? enc.a_u[k] : enc.a_l[k], coef});
        gamma_min.push_back({h > 0 ? enc.a_l[k] : enc.a_u[k], coef});
        gamma_abs += std::fabs(coef);
      }

      // Upper obligation: relu(L_max) <= a_u t - margin.
      {
        solver::Row row;
        row.terms.push_back({enc.a_u[j], static_cast<double>(t)});
        for (const auto& g : gamma_max) row.terms.push_back({g.var, -g.coef});
        row.rel = solver::Relation::GreaterEq;
        row.rhs = c_hi + margin;
        lp.rows.push_back(std::move(row));
        if (relu)
          lp.add_row({{enc.a_u[j], static_cast<double>(t)}}, solver::Relation::GreaterEq, margin);
      }

      // Lower obligation. Identity layers: a_l t <= L_min - margin. Relu
      // layers: a_l t <= 0 (implied structurally, no margin needed) OR
      // a_l t <= L_min - margin, one binary when the sign of L_min is open.
      double lmin_lb = c_lo - gamma_abs * alpha_bound;
      double lmin_ub = c_lo + gamma_abs * alpha_bound;
      auto lmin_row = [&](std::optional<std::pair<int, double>> big_m) {
        solver::Row row;
        row.terms.push_back({enc.a_l[j], static_cast<double>(t)});
        for (const auto& g : gamma_min) row.terms.push_back({g.var, -g.coef});
        if (big_m) row.terms.push_back({big_m->first, big_m->second});
        row.rel = solver::Relation::LessEq;
        row.rhs = c_lo - margin;
        lp.rows.push_back(std::move(row));
      };
      if (!relu) {
        lmin_row(std::nullopt);
      } else if (lmin_lb >= margin) {
        lmin_row(std::nullopt);
      } else if (lmin_ub <= 0.0) {
        lp.add_row({{enc.a_l[j], static_cast<double>(t)}}, solver::Relation::LessEq, 0.0);
      } else {
        int d = lp.add_variable(0.0, 1.0);
        enc.milp.mark_binary(d);
        double m_zero = alpha_bound * t + 1.0;
        lp.add_row({{enc.a_l[j], static_cast<double>(t)}, {d, m_zero}}, solver::Relation::LessEq,
                   m_zero);
        double m_min = alpha_bound * t + std::fabs(c_lo) + gamma_abs * alpha_bound + margin + 1.0;
        lmin_row(std::pair{d, -m_min});
      }
    }
  }

  lp.objective.assign(lp.num_vars(), 0.0);
  for (int j = 0; j < units; ++j) {
    lp.objective[enc.a_u[j]] = 1.0;
    lp.objective[enc.a_l[j]] = -1.0;
  }
  lp.maximize = false;
  return enc;
}

}  // namespace

InferResult infer_milp(const RnnNetwork& net, const InputProperty& P, const InvariantSet& proven,
                       int layer, int t_max, const std::vector<int>& t_subset,
                       const EngineConfig& cfg) {
  if (!net.layer(layer - 1).has_memory())
    throw StructureError("infer_milp: layer has no memory units");
  for (int l : net.memory_layers()) {
    if (l >= layer) break;
    if (!proven.covers_layer(net, l))
      throw StructureError("infer_milp: earlier memory layer not covered");
  }
  std::vector<int> steps = t_subset;
  if (steps.empty())
    for (int t = 1; t <= t_max - 1; ++t) steps.push_back(t);
  for (int t : steps)
    if (t < 1 || t > t_max - 1) throw StructureError("infer_milp: step outside [1, t_max-1]");

  InferResult res;
  int units = net.layer(layer - 1).size();
  if (steps.empty()) {
    res.status = InferResult::Status::Candidate;
    for (int j = 0; j < units; ++j) res.candidate.set({layer, j, 0.0, 0.0});
    res.raw_upper.assign(units, 0.0);
    res.raw_lower.assign(units, 0.0);
    return res;
  }

  double alpha_bound = compute_search_bound(net, P, t_max, cfg);
  for (int attempt = 0; attempt < 4; ++attempt) {
    LayerMilp raw = build_layer_milp(net, P, proven, layer, t_max, steps, alpha_bound, 0.0);
    auto raw_sol = solver::solve_milp(raw.milp, cfg.verifier.tol, cfg.verifier.budget);
    if (raw_sol.status == solver::SolveStatus::Infeasible) {
      res.status = InferResult::Status::Infeasible;
      return res;
    }
    if (raw_sol.status != solver::SolveStatus::Optimal) {
      res.status = InferResult::Status::Budget;
      return res;
    }
    LayerMilp padded =
        build_layer_milp(net, P, proven, layer, t_max, steps, alpha_bound, cfg.margin());
    auto pad_sol = solver::solve_milp(padded.milp, cfg.verifier.tol, cfg.verifier.budget);
    if (pad_sol.status == solver::SolveStatus::Infeasible) {
      res.status = InferResult::Status::Infeasible;
      return res;
    }
    if (pad_sol.status != solver::SolveStatus::Optimal) {
      res.status = InferResult::Status::Budget;
      return res;
    }

    bool touches_box = false;
    for (int j = 0; j < units; ++j) {
      for (double v : {raw_sol.assignment[raw.a_l[j]], raw_sol.assignment[raw.a_u[j]],
                       pad_sol.assignment[padded.a_l[j]], pad_sol.assignment[padded.a_u[j]]})
        if (std::fabs(v) > 0.95 * alpha_bound) touches_box = true;
    }
    if (touches_box && attempt + 1 < 4) {
      alpha_bound *= 8.0;
      continue;
    }

    res.status = InferResult::Status::Candidate;
    res.stats = pad_sol.stats;
    res.raw_upper.resize(units);
    res.raw_lower.resize(units);
    for (int j = 0; j < units; ++j) {
      res.raw_upper[j] = raw_sol.assignment[raw.a_u[j]];
      res.raw_lower[j] = raw_sol.assignment[raw.a_l[j]];
      res.candidate.set({layer, j, pad_sol.assignment[padded.a_l[j]],
                         pad_sol.assignment[padded.a_u[j]]});
    }
    return res;
  }
  res.status = InferResult::Status::Budget;
  return res;
}

InferResult strengthen_milp(const RnnNetwork& net, const InputProperty& P,
                            const InvariantSet& proven, int layer, int t_max,
                            const InferResult& previous, double epsilon_tighten,
                            const EngineConfig& cfg) {
  if (epsilon_tighten <= 0.0) return previous;  // no-progress case
  int units = net.layer(layer - 1).size();
  std::vector<int> steps;
  for (int t = 1; t <= t_max - 1; ++t) steps.push_back(t);

  double alpha_bound = compute_search_bound(net, P, t_max, cfg);
  for (const auto& inv : previous.candidate.invariants)
    alpha_bound = std::max(alpha_bound, std::fabs(inv.alpha_u) * 2.0);

  InferResult res;
  auto solve_variant = [&](double margin, LayerMilp& enc) {
    enc = build_layer_milp(net, P, proven, layer, t_max, steps, alpha_bound, margin);
    for (int j = 0; j < units; ++j) {
      enc.milp.lp.add_row({{enc.a_u[j], 1.0}}, solver::Relation::LessEq,
                          previous.raw_upper[j] - epsilon_tighten);
      enc.milp.lp.add_row({{enc.a_l[j], 1.0}}, solver::Relation::GreaterEq,
                          previous.raw_lower[j] + epsilon_tighten);
    }
    return solver::solve_milp(enc.milp, cfg.verifier.tol, cfg.verifier.budget);
  };

  LayerMilp raw_enc, pad_enc;
  auto raw_sol = solve_variant(0.0, raw_enc);
  if (raw_sol.status == solver::SolveStatus::Infeasible) {
    res.status = InferResult::Status::Infeasible;
    return res;
  }
  if (raw_sol.status != solver::SolveStatus::Optimal) {
    res.status = InferResult::Status::Budget;
    return res;
  }
  auto pad_sol = solve_variant(cfg.margin(), pad_enc);
  if (pad_sol.status == solver::SolveStatus::Infeasible) {
    res.status = InferResult::Status::Infeasible;
    return res;
  }
  if (pad_sol.status != solver::SolveStatus::Optimal) {
    res.status = InferResult::Status::Budget;
    return res;
  }
  res.status = InferResult::Status::Candidate;
  res.stats = pad_sol.stats;
  res.raw_upper.resize(units);
  res.raw_lower.resize(units);
  for (int j = 0; j < units; ++j) {
    res.raw_upper[j] = raw_sol.assignment[raw_enc.a_u[j]];
    res.raw_lower[j] = raw_sol.assignment[raw_enc.a_l[j]];
    res.candidate.set(
        {layer, j, pad_sol.assignment[pad_enc.a_l[j]], pad_sol.assignment[pad_enc.a_u[j]]});
  }
  return res;
}

InvariantSet incremental_adjust(const InvariantSet& candidate, const FailureSignal& failure,
                                double step, int round_robin_counter) {
  if (step <= 0.0) throw StructureError("incremental_adjust: step must be positive");
  InvariantSet out = candidate;
  if (failure.kind == FailureSignal::Kind::Refuted) {
    LinearInvariant* inv = out.find(failure.layer, failure.unit);
    if (!inv) throw StructureError("incremental_adjust: unknown unit");
    if (failure.direction == BoundDirection::Upper)
      inv->alpha_u += step;
    else
      inv->alpha_l -= step;
    return out;
  }
  // Snapshot SAT: tighten one upper bound, round-robin over the units.
  if (out.invariants.empty()) throw StructureError("incremental_adjust: empty invariant set");
  size_t pick = static_cast<size_t>(round_robin_counter) % out.invariants.size();
  LinearInvariant& inv = out.invariants[pick];
  inv.alpha_u = std::max(inv.alpha_l, inv.alpha_u - step);
  return out;
}

}  // namespace rnncert
