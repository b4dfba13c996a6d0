#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rnncert/invariant_engine.hpp"
#include "rnncert/props.hpp"

namespace rnncert {

enum class InferenceMode : uint8_t { Auto, Alg1, Alg2, Milp, Incremental };

const char* to_string(InferenceMode m);
std::optional<InferenceMode> parse_mode(const std::string& name);

struct PipelineConfig {
  InferenceMode mode = InferenceMode::Auto;
  double epsilon = 0.01;
  double epsilon_tighten = 0.1;
  int max_refinements = 10;
  double m_floor = 1e3;
  double m_cap = 1e6;
  double incremental_step = 1.0;
  int falsify_samples = 64;
  uint64_t seed = 1;

  // Per-engine-query budget; zero/negative means unlimited. The pivot and
  // node caps are deterministic and reproduce across runs.
  long budget_ms = 0;
  long max_pivots = -1;
  long max_nodes = -1;

  solver::Tolerances tolerances;

  EngineConfig engine() const;
};

struct RunReport {
  Verdict verdict;
  InvariantSet invariants;
  PhaseTimings timings;
  int refinements = 0;
  InferenceMode mode_used = InferenceMode::Auto;
  std::vector<InvariantSet> candidate_history;  // successive certified sets
};

/// Snapshot pipeline: infer invariants, certify them, solve the snapshot
/// query; refine on failure; attempt concrete falsification on SAT.
RunReport verify_rnn(const RnnQuery& q, const PipelineConfig& cfg = {});

/// Replays candidate input sequences derived from a satisfiable snapshot
/// witness; returns a genuine violating trace and its 1-based step, if any.
std::optional<std::pair<RnnTrace, int>> falsify_concrete(const RnnQuery& q,
                                                         const std::vector<Vector>& witness,
                                                         const SnapshotNetwork& snap,
                                                         const PipelineConfig& cfg = {});

/// Exact baseline: unroll to t_max and decide one feed-forward query per
/// time step and output disjunct.
Verdict verify_rnn_unrolled(const RnnQuery& q, const PipelineConfig& cfg = {});

/// True iff the trace satisfies P at every step and some disjunct of Q at
/// `step` (1-based), under exact replay semantics.
bool trace_satisfies(const RnnQuery& q, const RnnTrace& trace, int step, double tol = 1e-9);

}  // namespace rnncert
