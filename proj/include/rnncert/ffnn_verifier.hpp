#pragma once

#include <string>
#include <vector>

#include "rnncert/network.hpp"
#include "rnncert/props.hpp"
#include "rnncert/solver.hpp"

namespace rnncert {

/// Sound per-neuron value intervals; index [layer][neuron], layer 0 = inputs
/// (pre == post there).
struct NeuronBounds {
  std::vector<std::vector<Interval>> pre;
  std::vector<std::vector<Interval>> post;
};

NeuronBounds propagate_bounds(const FfnnNetwork& net, const std::vector<Interval>& input_box);

struct VerifierConfig {
  solver::Tolerances tol;
  solver::SolveBudget budget;
  std::string dump_lp_path;  // when non-empty, the encoded problem is written there
};

enum class VerifyStatus : uint8_t { Sat, Unsat, Budget, NumericalFailure };

struct VerifyResult {
  VerifyStatus status = VerifyStatus::NumericalFailure;
  /// Full layer-value assignment obtained by replaying the extracted inputs
  /// through the network (exact semantics), present for Sat.
  std::vector<Vector> witness;
  bool replay_clean = true;  // replayed witness satisfies all constraints at 1e-6
  solver::SolveStats stats;
};

const char* to_string(VerifyStatus s);

/// Complete decision procedure: feasibility MILP with one variable per
/// neuron, big-M encodings only for sign-unstable ReLUs.
VerifyResult verify(const FfnnNetwork& net, const std::vector<NeuronConstraint>& constraints,
                    const VerifierConfig& cfg = {});
VerifyResult verify(const FfnnQuery& q, const VerifierConfig& cfg = {});

/// Test oracle: enumerate every phase pattern of the unstable ReLUs and solve
/// one LP per pattern. Throws StructureError beyond `max_unstable` ReLUs.
VerifyResult verify_exhaustive(const FfnnNetwork& net,
                               const std::vector<NeuronConstraint>& constraints,
                               int max_unstable = 14, const VerifierConfig& cfg = {});
VerifyResult verify_exhaustive(const FfnnQuery& q, int max_unstable = 14,
                               const VerifierConfig& cfg = {});

}  // namespace rnncert
