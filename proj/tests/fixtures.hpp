// Networks used across the test suites. The three small ones mirror the toy
// networks the engine is documented against; random_rnn drives the
// randomized equivalence and soundness suites.
#pragma once

#include "rnncert/network.hpp"
#include "rnncert/rng.hpp"

namespace rnncert::test {

/// 1 input -> relu(x), relu(-x) -> out = h1 + 2 h2. No memory.
inline RnnNetwork make_feedforward_toy() {
  LayerWeights hidden{Matrix::from_rows({{1.0}, {-1.0}}), std::nullopt, {0.0, 0.0},
                      Activation::ReLU};
  LayerWeights out{Matrix::from_rows({{1.0, 2.0}}), std::nullopt, {0.0}, Activation::Identity};
  return RnnNetwork(1, {hidden, out});
}

/// 1 input -> single relu neuron with a self-memory of weight 1 -> identity out.
inline RnnNetwork make_single_memory_toy() {
  LayerWeights hidden{Matrix::from_rows({{1.0}}), Matrix::from_rows({{1.0}}), {0.0},
                      Activation::ReLU};
  LayerWeights out{Matrix::from_rows({{1.0}}), std::nullopt, {0.0}, Activation::Identity};
  return RnnNetwork(1, {hidden, out});
}

/// One hidden layer with two coupled memory units:
///   v1 = relu(-x + m1 + m2),  v2 = relu(2x - m1 + m2),  out = v1 + v2.
inline RnnNetwork make_two_unit_layer_toy() {
  LayerWeights hidden{Matrix::from_rows({{-1.0}, {2.0}}),
                      Matrix::from_rows({{1.0, 1.0}, {-1.0, 1.0}}),
                      {0.0, 0.0},
                      Activation::ReLU};
  LayerWeights out{Matrix::from_rows({{1.0, 1.0}}), std::nullopt, {0.0}, Activation::Identity};
  return RnnNetwork(1, {hidden, out});
}

/// Two single-unit recurrent layers chained with all weights 1.
inline RnnNetwork make_two_layer_chain_toy() {
  LayerWeights l1{Matrix::from_rows({{1.0}}), Matrix::from_rows({{1.0}}), {0.0},
                  Activation::ReLU};
  LayerWeights l2{Matrix::from_rows({{1.0}}), Matrix::from_rows({{1.0}}), {0.0},
                  Activation::ReLU};
  LayerWeights out{Matrix::from_rows({{1.0}}), std::nullopt, {0.0}, Activation::Identity};
  return RnnNetwork(1, {l1, l2, out});
}

struct RandomRnnOptions {
  int max_inputs = 3;
  int max_recurrent_layers = 2;
  int max_units_per_layer = 2;
  int max_dense_layers = 2;
  int max_dense_size = 3;
  int max_outputs = 2;
  double weight_scale = 1.0;
};

inline RnnNetwork random_rnn(SplitMix64& rng, const RandomRnnOptions& opt = {}) {
  int inputs = rng.uniform_int(1, opt.max_inputs);
  int rec_layers = rng.uniform_int(1, opt.max_recurrent_layers);
  int dense_layers = rng.uniform_int(0, opt.max_dense_layers);
  int outputs = rng.uniform_int(1, opt.max_outputs);

  std::vector<LayerWeights> layers;
  int prev = inputs;
  auto rand_matrix = [&](int r, int c, double scale) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-scale, scale);
    return m;
  };
  for (int i = 0; i < rec_layers; ++i) {
    int size = rng.uniform_int(1, opt.max_units_per_layer);
    LayerWeights l;
    l.W = rand_matrix(size, prev, opt.weight_scale);
    l.H = rand_matrix(size, size, opt.weight_scale);
    l.b.assign(size, 0.0);
    for (double& b : l.b) b = rng.uniform(-0.5, 0.5);
    l.activation = Activation::ReLU;
    layers.push_back(std::move(l));
    prev = size;
  }
  for (int i = 0; i < dense_layers; ++i) {
    int size = rng.uniform_int(1, opt.max_dense_size);
    LayerWeights l;
    l.W = rand_matrix(size, prev, opt.weight_scale);
    l.b.assign(size, 0.0);
    for (double& b : l.b) b = rng.uniform(-0.5, 0.5);
    l.activation = Activation::ReLU;
    layers.push_back(std::move(l));
    prev = size;
  }
  LayerWeights out;
  out.W = rand_matrix(outputs, prev, opt.weight_scale);
  out.b.assign(outputs, 0.0);
  for (double& b : out.b) b = rng.uniform(-0.5, 0.5);
  out.activation = Activation::Identity;
  layers.push_back(std::move(out));
  return RnnNetwork(inputs, std::move(layers));
}

inline std::vector<Vector> random_input_sequence(SplitMix64& rng, int dim, int steps,
                                                 double lo = -2.0, double hi = 2.0) {
  std::vector<Vector> seq(steps, Vector(dim));
  for (auto& v : seq)
    for (double& x : v) x = rng.uniform(lo, hi);
  return seq;
}

}  // namespace rnncert::test
