#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lazygraph/arena.hpp"
#include "lazygraph/graph.hpp"
#include "lazygraph/types.hpp"

namespace lazygraph {

enum class RecoveryPolicy { Abort, FallbackToHost };

struct FaultEvent {
  NodeId node;
  int device = 0;
  std::string message;
  bool recovered = false;
};

struct EvalStats {
  std::uint64_t kernels_host = 0;
  std::uint64_t kernels_device = 0;
  std::vector<NodeId> nodes_evaluated;     // execution order, including host re-executions
  std::vector<DeviceKind> devices;         // device of each entry in nodes_evaluated
  TransferLog transfers;                   // delta over this evaluation
  double virtual_transfer_ns = 0.0;
  double virtual_compute_ns = 0.0;
  double host_kernel_wall_ns = 0.0;
  double device_kernel_wall_ns = 0.0;
  std::vector<FaultEvent> faults;
};

template <typename Scalar>
struct Evaluation {
  std::span<const Scalar> values;
  EvalStats stats;
};

template <typename Scalar>
ExecutableGraph<Scalar> finalize(Graph<Scalar>&& graph, ArenaConfig arena_config);

template <typename Scalar>
ExecutableGraph<Scalar> finalize(Graph<Scalar>&& graph) {
  return finalize(std::move(graph), ArenaConfig{});
}

/// Computation-stage graph: structure, placement and buffers are fixed; variables stay mutable.
template <typename Scalar>
class ExecutableGraph {
 public:
  ExecutableGraph(ExecutableGraph&&) noexcept = default;
  ExecutableGraph& operator=(ExecutableGraph&&) noexcept = default;

  Graph<Scalar>& graph() noexcept { return graph_; }
  const Graph<Scalar>& graph() const noexcept { return graph_; }
  SimArena<Scalar>& arena() noexcept { return *arena_; }
  const SimArena<Scalar>& arena() const noexcept { return *arena_; }

  void set_variable(VariableRef var, double value) { graph_.set_variable(var, value); }
  void taint(NodeId id) { graph_.taint(id); }
  bool tainted(NodeId id) const { return graph_.tainted(id); }

  void set_recovery_policy(RecoveryPolicy policy) noexcept { recovery_ = policy; }
  RecoveryPolicy recovery_policy() const noexcept { return recovery_; }

  /// Sync every n-th device kernel's outputs back to host. Disabled when empty.
  void set_checkpoint_policy(std::optional<std::uint32_t> every_n) {
    if (every_n && *every_n == 0) throw Error(ErrorCode::InvalidSpec, "checkpoint interval must be positive");
    checkpoint_every_ = every_n;
  }
  std::optional<std::uint32_t> checkpoint_policy() const noexcept { return checkpoint_every_; }

  const std::vector<NodeId>& topological_order() const noexcept { return order_; }
  const Shape& shape(PortRef out) const {
    graph_.check_port(out, PortDirection::Output);
    return buffers_[out.node.value][out.index].shape();
  }
  const DataBuffer<Scalar>& buffer(PortRef out) const {
    graph_.check_port(out, PortDirection::Output);
    return buffers_[out.node.value][out.index];
  }

  std::uint64_t execution_count(NodeId id) const { return host_runs(id) + device_runs(id); }
  std::uint64_t host_runs(NodeId id) const { return counters_.at(id.value).host; }
  std::uint64_t device_runs(NodeId id) const { return counters_.at(id.value).device; }

  /// Evaluates the tainted ancestors of `out` and returns a host view of its data.
  /// Faults follow the recovery policy.
  Evaluation<Scalar> evaluate(PortRef out) { return run(out, recovery_); }

  /// Like evaluate, but device faults always fall back to host kernels.
  Evaluation<Scalar> evaluate_with_recovery(PortRef out) { return run(out, RecoveryPolicy::FallbackToHost); }

 private:
  friend ExecutableGraph finalize<Scalar>(Graph<Scalar>&&, ArenaConfig);

  struct Counters {
    std::uint64_t host = 0;
    std::uint64_t device = 0;
  };

  struct Pass {
    RecoveryPolicy policy;
    EvalStats stats;
    std::uint64_t device_kernels = 0;
  };

  ExecutableGraph(Graph<Scalar>&& g, ArenaConfig cfg)
      : graph_(std::move(g)), arena_(std::make_unique<SimArena<Scalar>>(std::move(cfg))) {}

  Evaluation<Scalar> run(PortRef out, RecoveryPolicy policy) {
    graph_.check_port(out, PortDirection::Output);
    const auto first_event = arena_->transfer_log().events.size();
    const double xfer0 = arena_->virtual_transfer_ns(), comp0 = arena_->virtual_compute_ns();
    const double hwall0 = arena_->host_kernel_wall_ns(), dwall0 = arena_->device_kernel_wall_ns();

    Pass pass{policy, {}, 0};
    ensure_clean(out.node, pass);
    ensure_host_valid(out, pass);

    pass.stats.transfers = arena_->transfer_log().since(first_event);
    pass.stats.virtual_transfer_ns = arena_->virtual_transfer_ns() - xfer0;
    pass.stats.virtual_compute_ns = arena_->virtual_compute_ns() - comp0;
    pass.stats.host_kernel_wall_ns = arena_->host_kernel_wall_ns() - hwall0;
    pass.stats.device_kernel_wall_ns = arena_->device_kernel_wall_ns() - dwall0;
    return {arena_->read_host(buffers_[out.node.value][out.index]), std::move(pass.stats)};
  }

  // Post-order depth-first walk over tainted ancestors, inputs in port order. A clean node has
  // clean ancestors, so the walk stops there.
  void ensure_clean(NodeId id, Pass& pass) {
    auto& node = graph_.nodes_[id.value];
    if (!node.tainted) return;
    for (const auto& src : node.sources) ensure_clean(src->node, pass);
    execute(id, pass);
    node.tainted = false;
  }

  void execute(NodeId id, Pass& pass) {
    const auto& node = graph_.nodes_[id.value];
    if (!node.target.is_host() && arena_->device_available(node.target.id)) {
      try {
        run_on_device(id, pass);
        return;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DeviceFault) throw;
        const bool recover = pass.policy == RecoveryPolicy::FallbackToHost;
        pass.stats.faults.push_back(FaultEvent{id, node.target.id, e.what(), recover});
        if (!recover) throw;
        arena_->fail_device(node.target.id);
      }
    }
    run_on_host(id, pass);
  }

  void run_on_device(NodeId id, Pass& pass) {
    const auto& node = graph_.nodes_[id.value];
    auto inputs = input_buffers(id);
    for (auto* buf : inputs)
      if (!buf->device_valid()) arena_->sync_to_device(*buf);
    auto outputs = output_buffers(id);
    const auto vars = variable_values(id);
    arena_->dispatch(node.target, node.spec.kernels.at(DeviceKind::SimDevice), inputs, outputs, vars);
    record(id, DeviceKind::SimDevice, pass);
    ++pass.device_kernels;
    if (checkpoint_every_ && pass.device_kernels % *checkpoint_every_ == 0)
      for (auto* buf : outputs) arena_->sync_to_host(*buf, TransferCause::Checkpoint);
  }

  void run_on_host(NodeId id, Pass& pass) {
    const auto& node = graph_.nodes_[id.value];
    for (std::uint32_t i = 0; i < node.sources.size(); ++i) ensure_host_valid(*node.sources[i], pass);
    auto inputs = input_buffers(id);
    auto outputs = output_buffers(id);
    const auto vars = variable_values(id);
    arena_->dispatch(DeviceSpec::host(), node.spec.kernels.at(DeviceKind::Host), inputs, outputs, vars);
    record(id, DeviceKind::Host, pass);
  }

  // Brings the host copy of an output up to date: a D2H when its device is alive, otherwise the
  // device copy is lost and the producer is re-run on host from its own host-valid inputs.
  void ensure_host_valid(PortRef out, Pass& pass) {
    auto& buf = buffers_[out.node.value][out.index];
    if (buf.host_valid()) return;
    if (arena_->device_available(*buf.device_id())) {
      arena_->sync_to_host(buf);
      return;
    }
    run_on_host(out.node, pass);
  }

  void record(NodeId id, DeviceKind kind, Pass& pass) {
    pass.stats.nodes_evaluated.push_back(id);
    pass.stats.devices.push_back(kind);
    if (kind == DeviceKind::Host) {
      ++pass.stats.kernels_host;
      ++counters_[id.value].host;
    } else {
      ++pass.stats.kernels_device;
      ++counters_[id.value].device;
    }
  }

  std::vector<DataBuffer<Scalar>*> input_buffers(NodeId id) {
    std::vector<DataBuffer<Scalar>*> out;
    for (const auto& src : graph_.nodes_[id.value].sources)
      out.push_back(&buffers_[src->node.value][src->index]);
    return out;
  }

  std::vector<DataBuffer<Scalar>*> output_buffers(NodeId id) {
    std::vector<DataBuffer<Scalar>*> out;
    for (auto& buf : buffers_[id.value]) out.push_back(&buf);
    return out;
  }

  std::vector<double> variable_values(NodeId id) const {
    std::vector<double> out;
    for (const auto& slot : graph_.nodes_[id.value].variable_slots) out.push_back(graph_.variable_value(*slot));
    return out;
  }

  Graph<Scalar> graph_;
  std::unique_ptr<SimArena<Scalar>> arena_;
  std::vector<std::vector<DataBuffer<Scalar>>> buffers_;  // per node, per output port
  std::vector<NodeId> order_;
  std::vector<Counters> counters_;
  RecoveryPolicy recovery_ = RecoveryPolicy::Abort;
  std::optional<std::uint32_t> checkpoint_every_;
};

namespace detail {

template <typename Scalar>
std::vector<NodeId> topological_sort(const Graph<Scalar>& g) {
  const auto n = g.node_count();
  std::vector<std::size_t> indegree(n, 0);
  for (std::uint32_t i = 0; i < n; ++i)
    for (const auto& src : g.node(NodeId{i}).sources)
      if (src) ++indegree[i];

  std::vector<NodeId> order;
  std::vector<NodeId> ready;
  for (std::uint32_t i = n; i-- > 0;)
    if (indegree[i] == 0) ready.push_back(NodeId{i});
  while (!ready.empty()) {
    auto cur = ready.back();
    ready.pop_back();
    order.push_back(cur);
    for (const auto& outs : g.node(cur).consumers)
      for (const auto& dst : outs)
        if (--indegree[dst.node.value] == 0) ready.push_back(dst.node);
  }
  if (order.size() == n) return order;

  // Every node left with nonzero indegree lies on or downstream of a cycle; walking sources
  // backwards from one of them must revisit a node.
  std::uint32_t start = 0;
  while (indegree[start] == 0) ++start;
  std::vector<int> seen_at(n, -1);
  std::vector<NodeId> path;
  NodeId cur{start};
  while (seen_at[cur.value] < 0) {
    seen_at[cur.value] = static_cast<int>(path.size());
    path.push_back(cur);
    for (const auto& src : g.node(cur).sources) {
      if (src && indegree[src->node.value] != 0) {
        cur = src->node;
        break;
      }
    }
  }
  std::string cycle;
  for (auto i = static_cast<std::size_t>(seen_at[cur.value]); i < path.size(); ++i)
    cycle = g.node(path[i]).spec.name + (cycle.empty() ? "" : " -> ") + cycle;
  throw Error(ErrorCode::CycleDetected, cycle + " -> " + g.node(cur).spec.name);
}

}  // namespace detail

/// Freezes the graph: checks bindings and acyclicity, infers every output shape in topological
/// order, and allocates all host and device storage up front. Outputs get a device copy when
/// their producer or any consumer targets a simulated device.
template <typename Scalar>
ExecutableGraph<Scalar> finalize(Graph<Scalar>&& graph, ArenaConfig arena_config) {
  if (graph.finalized()) throw Error(ErrorCode::GraphFinalized, "graph already finalized");

  std::string unbound;
  for (std::uint32_t i = 0; i < graph.node_count(); ++i) {
    const auto& node = graph.node(NodeId{i});
    for (std::uint32_t k = 0; k < node.sources.size(); ++k)
      if (!node.sources[k]) unbound += (unbound.empty() ? "" : ", ") + graph.port_name(input_port(NodeId{i}, k));
    for (std::size_t k = 0; k < node.variable_slots.size(); ++k)
      if (!node.variable_slots[k])
        unbound += (unbound.empty() ? "" : ", ") + node.spec.name + ".var:" + node.spec.variables[k];
  }
  if (!unbound.empty()) throw Error(ErrorCode::UnboundInput, unbound);

  auto order = detail::topological_sort(graph);

  ExecutableGraph<Scalar> exe(std::move(graph), std::move(arena_config));
  auto& g = exe.graph_;
  exe.order_ = std::move(order);
  exe.counters_.resize(g.node_count());
  exe.buffers_.resize(g.node_count());

  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    const auto& node = g.nodes_[i];
    if (!node.target.is_host()) {
      if (!node.spec.has_kernel(DeviceKind::SimDevice))
        throw Error(ErrorCode::NoDeviceKernel, "'" + node.spec.name + "' targets " + to_string(node.target));
      if (node.target.id < 0 || node.target.id >= exe.arena_->device_count())
        throw Error(ErrorCode::InvalidSpec, "'" + node.spec.name + "' targets missing " + to_string(node.target));
    }
  }

  std::vector<std::vector<Shape>> shapes(g.node_count());
  for (auto id : exe.order_) {
    const auto& node = g.nodes_[id.value];
    std::vector<Shape> in_shapes;
    for (std::size_t k = 0; k < node.sources.size(); ++k) {
      const auto& src = *node.sources[k];
      const auto& s = shapes[src.node.value][src.index];
      const auto& want = node.spec.inputs[k].rank;
      if (want && s.size() != *want) {
        throw Error(ErrorCode::ShapeMismatch, g.port_name(input_port(id, static_cast<std::uint32_t>(k))) +
                                                  " expects rank " + std::to_string(*want) + ", got " +
                                                  shape_to_string(s));
      }
      in_shapes.push_back(s);
    }
    for (const auto& out : node.spec.outputs) {
      Shape s = std::visit(
          [&](const auto& rule) -> Shape {
            using R = std::decay_t<decltype(rule)>;
            if constexpr (std::is_same_v<R, Shape>) {
              return rule;
            } else if constexpr (std::is_same_v<R, SameAsInput>) {
              return in_shapes.at(rule.index);
            } else {
              return rule(std::span<const Shape>(in_shapes));
            }
          },
          out.shape);
      shapes[id.value].push_back(std::move(s));
    }
  }

  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    const auto& node = g.nodes_[i];
    for (std::size_t k = 0; k < node.spec.outputs.size(); ++k) {
      std::vector<DeviceSpec> placement{DeviceSpec::host()};
      std::optional<DeviceSpec> device;
      auto place = [&](DeviceSpec d, const std::string& who) {
        if (d.is_host()) return;
        if (device && *device != d)
          throw Error(ErrorCode::InvalidSpec, node.spec.name + "." + node.spec.outputs[k].name +
                                                  " would need copies on two devices (via " + who + ")");
        device = d;
      };
      place(node.target, node.spec.name);
      for (const auto& dst : node.consumers[k]) place(g.nodes_[dst.node.value].target, g.nodes_[dst.node.value].spec.name);
      if (device) placement.push_back(*device);
      exe.buffers_[i].push_back(exe.arena_->allocate(shapes[i][k], placement));
    }
  }

  g.finalized_ = true;
  return exe;
}

}  // namespace lazygraph
