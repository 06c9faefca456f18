#pragma once

#include <map>
#include <string>

#include "lazygraph/bench/config.hpp"
#include "lazygraph/executor.hpp"

namespace lazygraph::bench {

template <typename Scalar>
struct BuiltGraph {
  ExecutableGraph<Scalar> exe;
  PortRef output;
  std::map<std::string, NodeId> nodes;
};

/// One host energy node shared by m independent oscillation subchains (three phase nodes and one
/// assembly node per baseline), all fed by one host weights node and merged by a weighted sum.
/// Variables: theta12, theta13, theta23, delta_cp, dm2_21, dm2_31, baseline_<b>, weight_<b>.
/// Placement groups: energy, weights, phase, oscprob, merge.
template <typename Scalar>
BuiltGraph<Scalar> build_builtin_oscprob(const RunConfig& cfg);

/// source (host) -> scale_0 .. scale_{k-1} (group "scale") -> sink (host identity).
template <typename Scalar>
BuiltGraph<Scalar> build_builtin_chain(const RunConfig& cfg);

/// Nodes and edges spelled out in [node.NAME] sections.
template <typename Scalar>
BuiltGraph<Scalar> build_custom(const RunConfig& cfg);

/// Dispatches on cfg.graph.
template <typename Scalar>
BuiltGraph<Scalar> build_graph(const RunConfig& cfg);

}  // namespace lazygraph::bench
