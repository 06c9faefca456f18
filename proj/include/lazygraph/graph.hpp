#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lazygraph/arena.hpp"
#include "lazygraph/types.hpp"

namespace lazygraph {

struct InputPortSpec {
  std::string name;
  std::optional<std::size_t> rank;  // any rank when empty
};

/// Output shape equals the shape bound to input `index`.
struct SameAsInput {
  std::size_t index = 0;
};

/// Output shape computed from all input shapes. May throw ShapeMismatch.
using ShapeFn = std::function<Shape(std::span<const Shape>)>;

using ShapeRule = std::variant<Shape, SameAsInput, ShapeFn>;

struct OutputPortSpec {
  std::string name;
  ShapeRule shape;
};

template <typename Scalar>
struct TransformationSpec {
  std::string name;
  std::vector<InputPortSpec> inputs;
  std::vector<OutputPortSpec> outputs;
  std::vector<std::string> variables;  // parameter slots, passed to kernels in this order
  std::map<DeviceKind, Kernel<Scalar>> kernels;

  bool has_kernel(DeviceKind kind) const {
    auto it = kernels.find(kind);
    return it != kernels.end() && static_cast<bool>(it->second);
  }

  void validate() const {
    if (outputs.empty()) throw Error(ErrorCode::InvalidSpec, "'" + name + "' declares no outputs");
    if (!has_kernel(DeviceKind::Host)) throw Error(ErrorCode::InvalidSpec, "'" + name + "' has no host kernel");
    for (const auto& [kind, fn] : kernels)
      if (!fn) throw Error(ErrorCode::InvalidSpec, "'" + name + "' has an empty " + std::string(to_string(kind)) + " kernel");
    for (const auto& out : outputs) {
      if (const auto* same = std::get_if<SameAsInput>(&out.shape); same && same->index >= inputs.size())
        throw Error(ErrorCode::InvalidSpec, "'" + name + "." + out.name + "' copies the shape of a missing input");
      if (const auto* fn = std::get_if<ShapeFn>(&out.shape); fn && !*fn)
        throw Error(ErrorCode::InvalidSpec, "'" + name + "." + out.name + "' has an empty shape function");
    }
  }
};

template <typename Scalar>
class Graph;
template <typename Scalar>
class ExecutableGraph;
template <typename Scalar>
ExecutableGraph<Scalar> finalize(Graph<Scalar>&& graph, ArenaConfig arena_config);

struct Variable {
  std::string name;
  double value = 0.0;
  std::set<NodeId> dependents;
};

/// Configuration-stage transformation graph. Structure is frozen once the graph is finalized;
/// variables stay mutable and taint their dependents.
template <typename Scalar>
class Graph {
 public:
  struct Node {
    TransformationSpec<Scalar> spec;
    bool tainted = true;
    DeviceSpec target = DeviceSpec::host();
    std::vector<std::optional<PortRef>> sources;            // per input port
    std::vector<std::optional<VariableRef>> variable_slots;  // per spec.variables entry
    std::vector<std::vector<PortRef>> consumers;            // per output port
  };

  NodeId add_node(TransformationSpec<Scalar> spec) {
    require_mutable();
    spec.validate();
    Node node;
    node.sources.resize(spec.inputs.size());
    node.variable_slots.resize(spec.variables.size());
    node.consumers.resize(spec.outputs.size());
    node.spec = std::move(spec);
    nodes_.push_back(std::move(node));
    return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  void bind(PortRef src, PortRef dst) {
    require_mutable();
    check_port(src, PortDirection::Output);
    check_port(dst, PortDirection::Input);
    if (src.node == dst.node)
      throw Error(ErrorCode::SelfLoop, "'" + node(src.node).spec.name + "' cannot feed itself");
    auto& slot = nodes_[dst.node.value].sources[dst.index];
    if (slot) throw Error(ErrorCode::AlreadyBound, port_name(dst) + " is already bound to " + port_name(*slot));
    slot = src;
    nodes_[src.node.value].consumers[src.index].push_back(dst);
  }

  VariableRef make_variable(const std::string& name, double value) {
    if (find_variable(name)) throw Error(ErrorCode::DuplicateName, "variable '" + name + "'");
    variables_.push_back(Variable{name, value, {}});
    return VariableRef{static_cast<std::uint32_t>(variables_.size() - 1)};
  }

  /// Adds `node` to the variable's dependents and binds the variable to the node's first unbound
  /// parameter slot. With no free slot left the variable is a pure dependency.
  void attach_variable(NodeId id, VariableRef var) {
    require_mutable();
    auto& n = mutable_node(id);
    check_variable(var);
    for (auto& slot : n.variable_slots) {
      if (!slot) {
        slot = var;
        break;
      }
    }
    variables_[var.value].dependents.insert(id);
  }

  /// Binds the variable to the named parameter slot.
  void attach_variable(NodeId id, VariableRef var, const std::string& slot_name) {
    require_mutable();
    auto& n = mutable_node(id);
    check_variable(var);
    const auto& names = n.spec.variables;
    auto it = std::find(names.begin(), names.end(), slot_name);
    if (it == names.end())
      throw Error(ErrorCode::UnknownVariable, "'" + n.spec.name + "' has no parameter slot '" + slot_name + "'");
    n.variable_slots[static_cast<std::size_t>(it - names.begin())] = var;
    variables_[var.value].dependents.insert(id);
  }

  /// Always taints, even when `value` equals the current value.
  void set_variable(VariableRef var, double value) {
    check_variable(var);
    auto& v = variables_[var.value];
    v.value = value;
    for (auto dep : v.dependents) taint(dep);
  }

  double variable_value(VariableRef var) const {
    check_variable(var);
    return variables_[var.value].value;
  }

  const Variable& variable(VariableRef var) const {
    check_variable(var);
    return variables_[var.value];
  }

  std::optional<VariableRef> find_variable(const std::string& name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
      if (variables_[i].name == name) return VariableRef{static_cast<std::uint32_t>(i)};
    return std::nullopt;
  }

  std::size_t variable_count() const noexcept { return variables_.size(); }

  /// Marks `id` and every descendant tainted.
  void taint(NodeId id) {
    node(id);
    std::vector<NodeId> stack{id};
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      auto& n = nodes_[cur.value];
      if (n.tainted && cur != id) continue;
      n.tainted = true;
      for (const auto& outs : n.consumers)
        for (const auto& dst : outs) stack.push_back(dst.node);
    }
  }

  bool tainted(NodeId id) const { return node(id).tainted; }

  void set_target_device(NodeId id, DeviceSpec device) {
    require_mutable();
    auto& n = mutable_node(id);
    if (!n.spec.has_kernel(device.kind))
      throw Error(ErrorCode::NoDeviceKernel,
                  "'" + n.spec.name + "' has no " + std::string(to_string(device.kind)) + " kernel");
    n.target = device;
  }

  const Node& node(NodeId id) const {
    if (id.value >= nodes_.size()) throw Error(ErrorCode::UnknownNode, "node #" + std::to_string(id.value));
    return nodes_[id.value];
  }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  bool finalized() const noexcept { return finalized_; }

  std::optional<NodeId> find_node(const std::string& name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].spec.name == name) return NodeId{static_cast<std::uint32_t>(i)};
    return std::nullopt;
  }

  std::string port_name(PortRef p) const {
    const auto& n = node(p.node);
    const bool in = p.direction == PortDirection::Input;
    const auto& name = in ? n.spec.inputs.at(p.index).name : n.spec.outputs.at(p.index).name;
    return n.spec.name + (in ? ".in:" : ".out:") + name;
  }

  void check_port(PortRef p, PortDirection expected) const {
    const auto& n = node(p.node);
    const auto count = p.direction == PortDirection::Input ? n.spec.inputs.size() : n.spec.outputs.size();
    if (p.direction != expected || p.index >= count)
      throw Error(ErrorCode::UnknownPort, "'" + n.spec.name + "' has no " +
                                              (expected == PortDirection::Input ? "input" : "output") + " port " +
                                              std::to_string(p.index));
  }

 private:
  template <typename>
  friend class ExecutableGraph;
  template <typename S>
  friend ExecutableGraph<S> finalize(Graph<S>&&, ArenaConfig);

  void require_mutable() const {
    if (finalized_) throw Error(ErrorCode::GraphFinalized, "graph structure is frozen");
  }

  Node& mutable_node(NodeId id) {
    node(id);
    return nodes_[id.value];
  }

  void check_variable(VariableRef var) const {
    if (var.value >= variables_.size())
      throw Error(ErrorCode::UnknownVariable, "variable #" + std::to_string(var.value));
  }

  std::vector<Node> nodes_;
  std::vector<Variable> variables_;
  bool finalized_ = false;
};

}  // namespace lazygraph
