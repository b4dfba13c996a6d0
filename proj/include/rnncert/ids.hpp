#pragma once

#include <compare>
#include <stdexcept>
#include <string>

namespace rnncert {

/// Position of a neuron inside a feed-forward network: layer 0 is the input
/// layer, the last layer is the output layer.
struct NeuronRef {
  int layer = 0;
  int index = 0;
  auto operator<=>(const NeuronRef&) const = default;
};

/// Named variable as it appears in properties. `layer`/`index` are only
/// meaningful for the kinds that need them.
struct VarId {
  enum class Kind : uint8_t { Time, Input, Output, Memory, Hidden };
  Kind kind = Kind::Time;
  int layer = 0;
  int index = 0;

  static VarId time() { return {Kind::Time, 0, 0}; }
  static VarId input(int k) { return {Kind::Input, 0, k}; }
  static VarId output(int k) { return {Kind::Output, 0, k}; }
  static VarId memory(int layer, int unit) { return {Kind::Memory, layer, unit}; }
  static VarId hidden(int layer, int idx) { return {Kind::Hidden, layer, idx}; }

  auto operator<=>(const VarId&) const = default;

  std::string to_string() const {
    switch (kind) {
      case Kind::Time: return "t";
      case Kind::Input: return "in:" + std::to_string(index);
      case Kind::Output: return "out:" + std::to_string(index);
      case Kind::Memory: return "mem:" + std::to_string(layer) + ":" + std::to_string(index);
      case Kind::Hidden: return "v:" + std::to_string(layer) + ":" + std::to_string(index);
    }
    return "?";
  }
};

struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnboundedVariableError : std::runtime_error {
  VarId var;
  explicit UnboundedVariableError(VarId v)
      : std::runtime_error("variable " + v.to_string() + " has no finite bound"), var(v) {}
};

}  // namespace rnncert
