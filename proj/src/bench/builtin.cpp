#include "lazygraph/bench/builtin.hpp"

#include "lazygraph/transformations.hpp"

namespace lazygraph::bench {

namespace {

/// Node-name entries win over group entries; without either, `fallback` applies. A disabled
/// device backend forces everything onto the host.
std::optional<DeviceSpec> resolve_placement(const RunConfig& cfg, const std::string& node, const std::string& group,
                                            bool device_by_default) {
  if (!cfg.device_enabled) return std::nullopt;
  if (auto it = cfg.placement.find(node); it != cfg.placement.end())
    return parse_placement(it->second, "placement." + node);
  if (auto it = cfg.placement.find(group); it != cfg.placement.end())
    return parse_placement(it->second, "placement." + group);
  return device_by_default ? std::optional(DeviceSpec::sim(0)) : std::nullopt;
}

template <typename Scalar>
class Builder {
 public:
  explicit Builder(const RunConfig& cfg) : cfg_(cfg) {}

  NodeId add(TransformationSpec<Scalar> spec, const std::string& group, bool device_by_default) {
    const std::string name = spec.name;
    auto id = graph_.add_node(std::move(spec));
    if (auto dev = resolve_placement(cfg_, name, group, device_by_default)) graph_.set_target_device(id, *dev);
    nodes_[name] = id;
    return id;
  }

  VariableRef var(const std::string& name, double value) { return graph_.make_variable(name, value); }

  Graph<Scalar>& graph() { return graph_; }

  BuiltGraph<Scalar> finish(PortRef output) {
    auto exe = finalize(std::move(graph_), cfg_.arena);
    exe.set_recovery_policy(cfg_.recovery);
    exe.set_checkpoint_policy(cfg_.checkpoint_every);
    return BuiltGraph<Scalar>{std::move(exe), output, std::move(nodes_)};
  }

 private:
  const RunConfig& cfg_;
  Graph<Scalar> graph_;
  std::map<std::string, NodeId> nodes_;
};

}  // namespace

template <typename Scalar>
BuiltGraph<Scalar> build_builtin_oscprob(const RunConfig& cfg) {
  Builder<Scalar> b(cfg);
  auto& g = b.graph();

  const auto energy = b.add(ops::source<Scalar>("energy", cfg.energies.values), "energy", false);
  const auto weights =
      b.add(ops::osc_weights<Scalar>("weights", cfg.alpha, cfg.beta, cfg.osc.antineutrino), "weights", false);

  const auto theta12 = b.var("theta12", cfg.osc.theta12);
  const auto theta13 = b.var("theta13", cfg.osc.theta13);
  const auto theta23 = b.var("theta23", cfg.osc.theta23);
  const auto delta = b.var("delta_cp", cfg.osc.delta_cp);
  const auto dm21 = b.var("dm2_21", cfg.osc.dm2_21);
  const auto dm31 = b.var("dm2_31", cfg.osc.dm2_31);
  for (auto v : {theta12, theta13, theta23, delta}) g.attach_variable(weights, v);

  const auto m = cfg.baselines.size();
  const auto merge = b.add(ops::weighted_sum<Scalar>("merge", m), "merge", false);
  for (std::size_t i = 0; i < m; ++i) {
    const auto suffix = "_" + std::to_string(i);
    const auto baseline = b.var("baseline" + suffix, cfg.baselines[i]);
    const auto p21 = b.add(ops::osc_phase<Scalar>("phase21" + suffix, osc::MassPair::p21), "phase", true);
    const auto p31 = b.add(ops::osc_phase<Scalar>("phase31" + suffix, osc::MassPair::p31), "phase", true);
    const auto p32 = b.add(ops::osc_phase<Scalar>("phase32" + suffix, osc::MassPair::p32), "phase", true);
    const auto prob = b.add(ops::oscprob<Scalar>("oscprob" + suffix, cfg.alpha == cfg.beta), "oscprob", true);

    for (auto phase : {p21, p31, p32}) g.bind(output_port(energy), input_port(phase));
    g.attach_variable(p21, dm21);
    g.attach_variable(p21, baseline);
    g.attach_variable(p31, dm31);
    g.attach_variable(p31, baseline);
    g.attach_variable(p32, dm31);
    g.attach_variable(p32, dm21);
    g.attach_variable(p32, baseline);

    g.bind(output_port(p21), input_port(prob, 0));
    g.bind(output_port(p31), input_port(prob, 1));
    g.bind(output_port(p32), input_port(prob, 2));
    g.bind(output_port(weights), input_port(prob, 3));

    g.bind(output_port(prob), input_port(merge, static_cast<std::uint32_t>(i)));
    g.attach_variable(merge, b.var("weight" + suffix, cfg.merge_weights[i]));
  }
  return b.finish(output_port(merge));
}

template <typename Scalar>
BuiltGraph<Scalar> build_builtin_chain(const RunConfig& cfg) {
  Builder<Scalar> b(cfg);
  auto& g = b.graph();
  std::vector<double> values(cfg.chain_size);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = 1.0 + static_cast<double>(i);
  PortRef prev = output_port(b.add(ops::source<Scalar>("source", std::move(values)), "source", false));
  for (std::size_t k = 0; k < cfg.chain_length; ++k) {
    const auto name = "scale_" + std::to_string(k);
    const auto node = b.add(ops::scale<Scalar>(name), "scale", true);
    g.bind(prev, input_port(node));
    g.attach_variable(node, b.var("factor_" + std::to_string(k), 1.0 + 0.125 * static_cast<double>(k + 1)));
    prev = output_port(node);
  }
  const auto sink = b.add(ops::identity<Scalar>("sink"), "sink", false);
  g.bind(prev, input_port(sink));
  return b.finish(output_port(sink));
}

template <typename Scalar>
BuiltGraph<Scalar> build_custom(const RunConfig& cfg) {
  Builder<Scalar> b(cfg);
  auto& g = b.graph();
  std::map<std::string, VariableRef> vars;
  for (const auto& [name, value] : cfg.variables) vars[name] = b.var(name, value);

  for (const auto& n : cfg.nodes) {
    TransformationSpec<Scalar> spec;
    if (n.kind == "source") spec = ops::source<Scalar>(n.name, n.values);
    else if (n.kind == "identity") spec = ops::identity<Scalar>(n.name);
    else if (n.kind == "scale") spec = ops::scale<Scalar>(n.name);
    else if (n.kind == "add") spec = ops::add<Scalar>(n.name);
    else if (n.kind == "product") spec = ops::product<Scalar>(n.name);
    else if (n.kind == "weighted_sum") spec = ops::weighted_sum<Scalar>(n.name, n.inputs.size());
    else if (n.kind == "osc_weights") spec = ops::osc_weights<Scalar>(n.name, n.alpha, n.beta, n.antineutrino);
    else if (n.kind == "osc_phase") spec = ops::osc_phase<Scalar>(n.name, n.pair);
    else spec = ops::oscprob<Scalar>(n.name, n.alpha == n.beta);

    const auto id = b.add(std::move(spec), n.kind, false);
    if (!n.placement.empty() && cfg.device_enabled) {
      if (auto dev = parse_placement(n.placement, "node." + n.name + ".device")) g.set_target_device(id, *dev);
    }
    for (const auto& v : n.variables) {
      auto it = vars.find(v);
      if (it == vars.end()) throw ConfigError::validation("node." + n.name + ".variables", "unknown variable '" + v + "'");
      g.attach_variable(id, it->second);
    }
  }
  for (const auto& n : cfg.nodes) {
    const auto dst = *g.find_node(n.name);
    for (std::size_t k = 0; k < n.inputs.size(); ++k)
      g.bind(output_port(*g.find_node(n.inputs[k])), input_port(dst, static_cast<std::uint32_t>(k)));
  }
  return b.finish(output_port(*g.find_node(cfg.output)));
}

template <typename Scalar>
BuiltGraph<Scalar> build_graph(const RunConfig& cfg) {
  if (cfg.graph == "oscprob") return build_builtin_oscprob<Scalar>(cfg);
  if (cfg.graph == "chain") return build_builtin_chain<Scalar>(cfg);
  return build_custom<Scalar>(cfg);
}

template BuiltGraph<float> build_builtin_oscprob<float>(const RunConfig&);
template BuiltGraph<double> build_builtin_oscprob<double>(const RunConfig&);
template BuiltGraph<float> build_builtin_chain<float>(const RunConfig&);
template BuiltGraph<double> build_builtin_chain<double>(const RunConfig&);
template BuiltGraph<float> build_custom<float>(const RunConfig&);
template BuiltGraph<double> build_custom<double>(const RunConfig&);
template BuiltGraph<float> build_graph<float>(const RunConfig&);
template BuiltGraph<double> build_graph<double>(const RunConfig&);

}  // namespace lazygraph::bench
