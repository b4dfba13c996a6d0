#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rnncert/ffnn_verifier.hpp"
#include "rnncert/network.hpp"
#include "rnncert/props.hpp"

namespace rnncert {

enum class BoundDirection : uint8_t { Upper, Lower };

struct PhiQuery {
  int layer = 0;
  int unit = 0;
  BoundDirection direction = BoundDirection::Upper;
  FfnnQuery query;
};

struct EngineConfig {
  double epsilon = 0.01;
  double epsilon_tighten = 0.1;
  double m_floor = 1e3;
  double m_cap = 1e6;
  VerifierConfig verifier;

  double margin() const { return std::max(epsilon / 4.0, 1e-4); }
};

/// The inductive-step family for one layer's candidate bounds: one query per
/// memory unit and bound direction. All queries are UNSAT iff the candidate
/// (together with `proven` for earlier layers) is an inductive invariant; the
/// base case is automatic since both template sides vanish at t = 1.
std::vector<PhiQuery> build_phi_i(const RnnNetwork& net, const InputProperty& P,
                                  const InvariantSet& proven, const InvariantSet& candidate,
                                  int layer, int t_max);

struct CheckOutcome {
  enum class Kind : uint8_t { Certified, Refuted, Budget, Failure } kind;
  int layer = 0;
  int unit = 0;
  BoundDirection direction = BoundDirection::Upper;
  std::vector<Vector> witness;  // snapshot assignment refuting the bound
};

CheckOutcome check_invariant(const std::vector<PhiQuery>& queries, const VerifierConfig& cfg);

/// Large-constant policy for the search algorithms: the memory-free interval
/// upper bound of the memory neurons scaled by the horizon, clamped to
/// [m_floor, m_cap].
double compute_search_bound(const RnnNetwork& net, const InputProperty& P, int t_max,
                            const EngineConfig& cfg);

struct SnapshotQueryResult {
  VerifyStatus status = VerifyStatus::Unsat;
  std::vector<Vector> witness;  // from the first satisfiable disjunct
  const SnapshotNetwork* snap = nullptr;
};

/// Builds and dispatches the full snapshot query (one FfnnQuery per output
/// disjunct) under the given invariant set.
SnapshotQueryResult solve_snapshot_query(const RnnNetwork& net, const InputProperty& P,
                                         const OutputProperty& Q, int t_max,
                                         const InvariantSet& invariants,
                                         const SnapshotNetwork& snap, const VerifierConfig& cfg,
                                         const std::function<void()>& on_query = {});

struct AlgResult {
  bool holds = false;
  InvariantSet invariants;
  std::string reason;
  std::vector<std::vector<Vector>> snapshot_witnesses;  // inputs seen on SAT snapshots
  int iterations = 0;
  bool budget_hit = false;
};

/// Timing sink shared with the pipeline: phases are "inference" (search
/// bookkeeping), "phi" (invariant checks), "snapshot" (final queries).
struct PhaseSink {
  std::function<void(int)> enter;  // 0=inference, 1=phi, 2=snapshot
};

/// Binary search over the upper slope of the network's single memory unit.
AlgResult alg1(const RnnQuery& q, double m, const EngineConfig& cfg,
               const PhaseSink& phases = {});

/// Layer-by-layer search for chains of single-memory-unit layers: certified
/// loose invariants first, then interleaved per-layer bisection until the
/// snapshot query closes or no layer can make progress.
AlgResult alg2(const RnnQuery& q, double m, const EngineConfig& cfg,
               const PhaseSink& phases = {});

struct InferResult {
  enum class Status : uint8_t { Candidate, Infeasible, Budget } status;
  InvariantSet candidate;            // margin-padded, ready for certification
  std::vector<double> raw_upper;     // per unit, margin-free MILP optimum
  std::vector<double> raw_lower;
  solver::SolveStats stats;
};

/// Joint inference of all alpha bounds of one layer as a MILP over the step
/// obligations for t in `t_subset` (default: every step in [1, t_max-1]).
/// Upper obligations are pure linear rows; each lower obligation carries one
/// binary for the relu disjunction. Candidates must still pass
/// check_invariant, which is also what makes subset encodings safe.
InferResult infer_milp(const RnnNetwork& net, const InputProperty& P, const InvariantSet& proven,
                       int layer, int t_max, const std::vector<int>& t_subset,
                       const EngineConfig& cfg);

/// Re-runs the layer MILP with bounds forced strictly inside the previous
/// candidate by epsilon_tighten. Infeasible means the previous candidate was
/// already optimal under the template.
InferResult strengthen_milp(const RnnNetwork& net, const InputProperty& P,
                            const InvariantSet& proven, int layer, int t_max,
                            const InferResult& previous, double epsilon_tighten,
                            const EngineConfig& cfg);

struct FailureSignal {
  enum class Kind : uint8_t { Refuted, SnapshotSat } kind;
  int layer = 0;
  int unit = 0;
  BoundDirection direction = BoundDirection::Upper;  // for Refuted
};

/// Appendix-style single-alpha adjustment: weaken the refuted bound, or
/// tighten one upper bound round-robin after a satisfiable snapshot query.
InvariantSet incremental_adjust(const InvariantSet& candidate, const FailureSignal& failure,
                                double step, int round_robin_counter = 0);

/// Concrete per-neuron box for the inputs of `layer` at time step t, from
/// interval propagation with memory intervals instantiated via `proven`.
std::vector<Interval> affine_bounds(const RnnNetwork& net, const InputProperty& P,
                                    const InvariantSet& proven, int layer, int t);

}  // namespace rnncert
