#include "rnncert/network.hpp"

#include <algorithm>

namespace rnncert {

namespace {

double activate(Activation a, double x) { return a == Activation::ReLU ? std::max(0.0, x) : x; }

}  // namespace

RnnNetwork::RnnNetwork(int input_dim, std::vector<LayerWeights> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  if (input_dim_ <= 0) throw StructureError("input dimension must be positive");
  if (layers_.empty()) throw StructureError("network needs at least one layer");
  int prev = input_dim_;
  for (size_t i = 0; i < layers_.size(); ++i) {
    const LayerWeights& l = layers_[i];
    if (l.W.cols() != prev)
      throw StructureError("layer " + std::to_string(i + 1) + ": weight columns (" +
                           std::to_string(l.W.cols()) + ") do not match previous size (" +
                           std::to_string(prev) + ")");
    if (l.W.rows() != static_cast<int>(l.b.size()))
      throw StructureError("layer " + std::to_string(i + 1) + ": bias size mismatch");
    if (l.H && (l.H->rows() != l.size() || l.H->cols() != l.size()))
      throw StructureError("layer " + std::to_string(i + 1) + ": memory matrix must be square");
    if (l.activation == Activation::Identity && i + 1 != layers_.size())
      throw StructureError("identity activation is only legal on the output layer");
    prev = l.size();
  }
}

std::vector<int> RnnNetwork::memory_layers() const {
  std::vector<int> out;
  for (int i = 0; i < num_layers(); ++i)
    if (layers_[i].has_memory()) out.push_back(i + 1);
  return out;
}

int RnnNetwork::total_memory_units() const {
  int n = 0;
  for (const auto& l : layers_)
    if (l.has_memory()) n += l.size();
  return n;
}

int RnnNetwork::node_count() const {
  int n = input_dim_;
  for (const auto& l : layers_) n += l.size() + (l.has_memory() ? l.size() : 0);
  return n;
}

RnnTrace evaluate_rnn(const RnnNetwork& net, const std::vector<Vector>& inputs) {
  if (inputs.empty()) throw StructureError("evaluate_rnn: empty input sequence");
  for (const auto& in : inputs)
    if (static_cast<int>(in.size()) != net.input_dim())
      throw StructureError("evaluate_rnn: input vector size mismatch");

  RnnTrace trace;
  trace.inputs = inputs;
  std::vector<Vector> mem(net.num_layers());
  for (int i = 0; i < net.num_layers(); ++i)
    if (net.layer(i).has_memory()) mem[i].assign(net.layer(i).size(), 0.0);

  for (const auto& in : inputs) {
    trace.memory.push_back(mem);
    std::vector<Vector> vals;
    const Vector* prev = &in;
    for (int i = 0; i < net.num_layers(); ++i) {
      const LayerWeights& l = net.layer(i);
      Vector pre = matvec(l.W, *prev);
      if (l.has_memory()) add_in_place(pre, matvec(*l.H, mem[i]));
      add_in_place(pre, l.b);
      for (double& v : pre) v = activate(l.activation, v);
      vals.push_back(std::move(pre));
      prev = &vals.back();
    }
    // Vanilla update rule: each memory unit stores its neuron's new value.
    for (int i = 0; i < net.num_layers(); ++i)
      if (net.layer(i).has_memory()) mem[i] = vals[i];
    trace.values.push_back(std::move(vals));
  }
  return trace;
}

FfnnNetwork::FfnnNetwork(int input_dim, std::vector<FfnnLayer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  if (input_dim_ <= 0) throw StructureError("input dimension must be positive");
  if (layers_.empty()) throw StructureError("network needs at least one layer");
  for (size_t i = 0; i < layers_.size(); ++i) {
    const FfnnLayer& l = layers_[i];
    if (l.incoming.empty()) throw StructureError("layer without incoming edges");
    for (const auto& in : l.incoming) {
      if (in.source < 0 || in.source > static_cast<int>(i))
        throw StructureError("layer edges must come from earlier layers");
      int src_size = in.source == 0 ? input_dim_ : layers_[in.source - 1].size();
      if (in.W.rows() != l.size() || in.W.cols() != src_size)
        throw StructureError("edge matrix dimensions do not match layer sizes");
    }
  }
}

int FfnnNetwork::node_count() const {
  int n = input_dim_;
  for (const auto& l : layers_) n += l.size();
  return n;
}

std::vector<Vector> FfnnNetwork::evaluate_all(const Vector& input) const {
  if (static_cast<int>(input.size()) != input_dim_)
    throw StructureError("evaluate: input size mismatch");
  std::vector<Vector> vals;
  vals.push_back(input);
  for (const auto& l : layers_) {
    Vector pre = l.bias;
    for (const auto& in : l.incoming) add_in_place(pre, matvec(in.W, vals[in.source]));
    for (double& v : pre) v = activate(l.activation, v);
    vals.push_back(std::move(pre));
  }
  return vals;
}

FfnnNetwork memory_free_ffnn(const RnnNetwork& net) {
  std::vector<FfnnLayer> layers;
  for (int i = 0; i < net.num_layers(); ++i) {
    const LayerWeights& l = net.layer(i);
    FfnnLayer fl;
    fl.incoming.push_back({i, l.W});
    fl.bias = l.b;
    fl.activation = l.activation;
    layers.push_back(std::move(fl));
  }
  return FfnnNetwork(net.input_dim(), std::move(layers));
}

NeuronRef SnapshotNetwork::resolve(const VarId& v) const {
  switch (v.kind) {
    case VarId::Kind::Time: return {0, time_input};
    case VarId::Kind::Input: return {0, original_input_offset + v.index};
    case VarId::Kind::Memory: {
      auto it = memory_vars.find({v.layer, v.index});
      if (it == memory_vars.end())
        throw StructureError("snapshot has no memory input for " + v.to_string());
      return {0, it->second};
    }
    case VarId::Kind::Hidden: {
      if (v.layer < 1 || v.layer > rnn_layers)
        throw StructureError("snapshot does not contain the layer of " + v.to_string());
      return {v.layer, v.index};
    }
    case VarId::Kind::Output: return {rnn_layers, v.index};
  }
  throw StructureError("unresolvable variable");
}

SnapshotNetwork snapshot(const RnnNetwork& net, int up_to_layer) {
  int n_layers = up_to_layer < 0 ? net.num_layers() : up_to_layer;
  SnapshotNetwork snap;
  snap.rnn_layers = n_layers;
  snap.time_input = 0;
  int pos = 1;
  for (int i = 1; i <= n_layers; ++i) {
    if (!net.layer(i - 1).has_memory()) continue;
    for (int j = 0; j < net.layer(i - 1).size(); ++j) snap.memory_vars[{i, j}] = pos++;
  }
  snap.original_input_offset = pos;
  int input_dim = pos + net.input_dim();

  std::vector<FfnnLayer> layers;
  for (int i = 1; i <= n_layers; ++i) {
    const LayerWeights& l = net.layer(i - 1);
    FfnnLayer fl;
    fl.bias = l.b;
    fl.activation = l.activation;
    // Layer-0 contributions (memory inputs; for layer 1 also the original
    // inputs) are merged into one padded matrix. The time neuron's column
    // stays zero everywhere: t only participates in properties.
    Matrix from_inputs(l.size(), input_dim);
    bool any_input = false;
    if (l.has_memory()) {
      for (int r = 0; r < l.size(); ++r)
        for (int c = 0; c < l.size(); ++c) from_inputs(r, snap.memory_vars[{i, c}]) = (*l.H)(r, c);
      any_input = true;
    }
    if (i == 1) {
      for (int r = 0; r < l.size(); ++r)
        for (int c = 0; c < net.input_dim(); ++c)
          from_inputs(r, snap.original_input_offset + c) = l.W(r, c);
      any_input = true;
    } else {
      fl.incoming.push_back({i - 1, l.W});
    }
    if (any_input) fl.incoming.push_back({0, std::move(from_inputs)});
    layers.push_back(std::move(fl));
  }
  snap.ffnn = FfnnNetwork(input_dim, std::move(layers));
  return snap;
}

int UnrolledNetwork::input_pos(int t, int k) const { return (t - 1) * copies_input_dim + k; }

int UnrolledNetwork::layer_of(int t, int i) const {
  int n = ffnn.num_layers() / t_max;
  return (t - 1) * n + i;
}

UnrolledNetwork unroll(const RnnNetwork& net, int t_max) {
  if (t_max < 1) throw StructureError("unroll: t_max must be >= 1");
  UnrolledNetwork out;
  out.t_max = t_max;
  out.copies_input_dim = net.input_dim();
  int n = net.num_layers();
  int input_dim = t_max * net.input_dim();

  std::vector<FfnnLayer> layers;
  for (int t = 1; t <= t_max; ++t) {
    for (int i = 1; i <= n; ++i) {
      const LayerWeights& l = net.layer(i - 1);
      FfnnLayer fl;
      fl.bias = l.b;
      fl.activation = l.activation;
      if (i == 1) {
        Matrix sel(l.size(), input_dim);
        for (int r = 0; r < l.size(); ++r)
          for (int c = 0; c < net.input_dim(); ++c)
            sel(r, (t - 1) * net.input_dim() + c) = l.W(r, c);
        fl.incoming.push_back({0, std::move(sel)});
      } else {
        fl.incoming.push_back({(t - 1) * n + i - 1, l.W});
      }
      // Inter-copy edges standing in for the memory units; copy 1 has none
      // (memory starts at zero).
      if (l.has_memory() && t > 1) fl.incoming.push_back({(t - 2) * n + i, *l.H});
      layers.push_back(std::move(fl));
    }
  }
  out.ffnn = FfnnNetwork(input_dim, std::move(layers));

  for (int t = 1; t <= t_max; ++t) {
    for (int k = 0; k < net.input_dim(); ++k)
      out.names[{0, out.input_pos(t, k)}] = {t, NeuronRef{0, k}};
    for (int i = 1; i <= n; ++i)
      for (int j = 0; j < net.layer(i - 1).size(); ++j)
        out.names[{out.layer_of(t, i), j}] = {t, NeuronRef{i, j}};
  }
  return out;
}

}  // namespace rnncert
