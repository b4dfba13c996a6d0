#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "rnncert/ids.hpp"
#include "rnncert/linalg.hpp"

namespace rnncert {

enum class Activation : uint8_t { ReLU, Identity };

/// One layer of a recurrent network. `W` maps the previous layer, `H` (when
/// present) maps this layer's memory units onto its neurons. A present but
/// all-zero H still declares memory units; an absent H declares none.
struct LayerWeights {
  Matrix W;
  std::optional<Matrix> H;
  Vector b;
  Activation activation = Activation::ReLU;

  int size() const { return W.rows(); }
  bool has_memory() const { return H.has_value(); }
};

/// Vanilla recurrent network. Layers are 1-based in diagnostics to match the
/// input layer being layer 0.
class RnnNetwork {
 public:
  RnnNetwork(int input_dim, std::vector<LayerWeights> layers);

  int input_dim() const { return input_dim_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  const LayerWeights& layer(int i) const { return layers_[i]; }
  const std::vector<LayerWeights>& layers() const { return layers_; }
  int output_dim() const { return layers_.back().size(); }

  /// 1-based indices of layers that carry memory units (H present).
  std::vector<int> memory_layers() const;
  int total_memory_units() const;
  /// Total node count including memory units (each memory unit is a node).
  int node_count() const;

 private:
  int input_dim_;
  std::vector<LayerWeights> layers_;
};

/// Execution record of an RNN over T steps. `memory[t]` holds the values the
/// memory units carried INTO step t (so memory[0] is all zeros).
struct RnnTrace {
  std::vector<Vector> inputs;                    // [t][input]
  std::vector<std::vector<Vector>> values;       // [t][layer][neuron], layer 1-based -> index 0
  std::vector<std::vector<Vector>> memory;       // [t][layer][unit]; empty Vector for layers without memory

  int steps() const { return static_cast<int>(inputs.size()); }
  const Vector& outputs(int t) const { return values[t].back(); }
};

RnnTrace evaluate_rnn(const RnnNetwork& net, const std::vector<Vector>& inputs);

/// Feed-forward layer that may read from any earlier layer (the input layer
/// included). This covers plain FFNNs, snapshot networks, and unrollings.
struct FfnnLayer {
  struct Incoming {
    int source;  // 0 = input layer, k>=1 = hidden layer k
    Matrix W;    // size x size(source)
  };
  std::vector<Incoming> incoming;
  Vector bias;
  Activation activation = Activation::ReLU;

  int size() const { return static_cast<int>(bias.size()); }
};

class FfnnNetwork {
 public:
  FfnnNetwork() = default;  // empty shell, filled by snapshot/unroll builders
  FfnnNetwork(int input_dim, std::vector<FfnnLayer> layers);

  int input_dim() const { return input_dim_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  const FfnnLayer& layer(int i) const { return layers_[i - 1]; }  // 1-based
  int layer_size(int i) const { return i == 0 ? input_dim_ : layers_[i - 1].size(); }
  int output_dim() const { return layers_.back().size(); }
  int node_count() const;

  /// Values of every layer (index 0 = the input itself).
  std::vector<Vector> evaluate_all(const Vector& input) const;
  Vector evaluate(const Vector& input) const { return evaluate_all(input).back(); }

 private:
  int input_dim_ = 0;
  std::vector<FfnnLayer> layers_;
};

/// Builds a plain feed-forward network from an RNN's W/b, dropping memory.
FfnnNetwork memory_free_ffnn(const RnnNetwork& net);

/// Snapshot construction: every memory unit becomes an input neuron wired
/// with its H weights, plus one isolated input neuron for the time variable.
struct SnapshotNetwork {
  FfnnNetwork ffnn;
  int time_input = 0;                              // position in layer 0
  std::map<std::pair<int, int>, int> memory_vars;  // (rnn layer, unit) -> layer-0 position
  int original_input_offset = 0;                   // where the RNN inputs start in layer 0
  int rnn_layers = 0;                              // layers included (truncation-aware)

  /// Maps property variables onto neuron positions.
  NeuronRef resolve(const VarId& v) const;
};

/// `up_to_layer` truncates the construction after that 1-based layer; -1
/// keeps the whole network. Truncation is used for per-layer invariant
/// queries, where deeper layers are unconstrained.
SnapshotNetwork snapshot(const RnnNetwork& net, int up_to_layer = -1);

struct UnrolledNetwork {
  FfnnNetwork ffnn;
  int t_max = 0;
  int copies_input_dim = 0;

  /// Layer-0 position of input k of copy t (1-based t).
  int input_pos(int t, int k) const;
  /// FFNN layer index holding RNN layer i (1-based) of copy t.
  int layer_of(int t, int i) const;
  /// Naming map: unrolled neuron -> (copy, original neuron).
  std::map<NeuronRef, std::pair<int, NeuronRef>> names;
};

UnrolledNetwork unroll(const RnnNetwork& net, int t_max);

}  // namespace rnncert
