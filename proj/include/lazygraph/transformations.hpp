#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lazygraph/graph.hpp"
#include "lazygraph/oscillation.hpp"

/// Ready-made transformation specs. Each array kernel comes as a host implementation over
/// Eigen maps and a device implementation written per element, the way a device grid would run it.
namespace lazygraph::ops {

namespace detail {

template <typename Scalar>
using ConstMap = Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>>;
template <typename Scalar>
using Map = Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>>;

template <typename Scalar>
ConstMap<Scalar> in_range(const KernelArgs<Scalar>& a, std::size_t k) {
  return ConstMap<Scalar>(a.inputs[k].data() + a.begin, static_cast<Eigen::Index>(a.end - a.begin));
}
template <typename Scalar>
Map<Scalar> out_range(const KernelArgs<Scalar>& a, std::size_t k = 0) {
  return Map<Scalar>(a.outputs[k].data() + a.begin, static_cast<Eigen::Index>(a.end - a.begin));
}

/// Wraps a per-element body into a kernel over the dispatched range.
template <typename Scalar, typename Body>
Kernel<Scalar> per_element(Body body) {
  return [body](const KernelArgs<Scalar>& a) {
    for (std::size_t i = a.begin; i < a.end; ++i) body(a, i);
  };
}

inline ShapeFn same_shapes(std::string name) {
  return [name](std::span<const Shape> in) {
    for (std::size_t k = 1; k < in.size(); ++k)
      if (in[k] != in[0])
        throw Error(ErrorCode::ShapeMismatch, "'" + name + "' input " + std::to_string(k) + " has shape " +
                                                  shape_to_string(in[k]) + ", expected " + shape_to_string(in[0]));
    return in.empty() ? Shape{} : in[0];
  };
}

}  // namespace detail

/// Constant array produced on host, e.g. the energy grid.
template <typename Scalar>
TransformationSpec<Scalar> source(std::string name, std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidSpec, "'" + name + "' has no values");
  TransformationSpec<Scalar> spec;
  spec.name = std::move(name);
  spec.outputs = {{"values", Shape{values.size()}}};
  spec.kernels[DeviceKind::Host] = [values = std::move(values)](const KernelArgs<Scalar>& a) {
    for (std::size_t i = a.begin; i < a.end; ++i) a.outputs[0][i] = static_cast<Scalar>(values[i]);
  };
  return spec;
}

template <typename Scalar>
TransformationSpec<Scalar> identity(std::string name) {
  TransformationSpec<Scalar> spec;
  spec.name = std::move(name);
  spec.inputs = {{"x", std::nullopt}};
  spec.outputs = {{"y", SameAsInput{0}}};
  spec.kernels[DeviceKind::Host] = [](const KernelArgs<Scalar>& a) {
    detail::out_range(a) = detail::in_range(a, 0);
  };
  spec.kernels[DeviceKind::SimDevice] = detail::per_element<Scalar>(
      [](const KernelArgs<Scalar>& a, std::size_t i) { a.outputs[0][i] = a.inputs[0][i]; });
  return spec;
}

/// y = k·x with k taken from the "factor" variable.
template <typename Scalar>
TransformationSpec<Scalar> scale(std::string name) {
  TransformationSpec<Scalar> spec;
  spec.name = std::move(name);
  spec.inputs = {{"x", std::nullopt}};
  spec.outputs = {{"y", SameAsInput{0}}};
  spec.variables = {"factor"};
  spec.kernels[DeviceKind::Host] = [](const KernelArgs<Scalar>& a) {
    detail::out_range(a) = static_cast<Scalar>(a.variables[0]) * detail::in_range(a, 0);
  };
  spec.kernels[DeviceKind::SimDevice] = detail::per_element<Scalar>([](const KernelArgs<Scalar>& a, std::size_t i) {
    a.outputs[0][i] = static_cast<Scalar>(a.variables[0]) * a.inputs[0][i];
  });
  return spec;
}

template <typename Scalar>
TransformationSpec<Scalar> add(std::string name) {
  TransformationSpec<Scalar> spec;
  spec.name = name;
  spec.inputs = {{"a", std::nullopt}, {"b", std::nullopt}};
  spec.outputs = {{"sum", detail::same_shapes(name)}};
  spec.kernels[DeviceKind::Host] = [](const KernelArgs<Scalar>& a) {
    detail::out_range(a) = detail::in_range(a, 0) + detail::in_range(a, 1);
  };
  spec.kernels[DeviceKind::SimDevice] = detail::per_element<Scalar>(
      [](const KernelArgs<Scalar>& a, std::size_t i) { a.outputs[0][i] = a.inputs[0][i] + a.inputs[1][i]; });
  return spec;
}

template <typename Scalar>
TransformationSpec<Scalar> product(std::string name) {
  TransformationSpec<Scalar> spec;
  spec.name = name;
  spec.inputs = {{"a", std::nullopt}, {"b", std::nullopt}};
  spec.outputs = {{"product", detail::same_shapes(name)}};
  spec.kernels[DeviceKind::Host] = [](const KernelArgs<Scalar>& a) {
    detail::out_range(a) = detail::in_range(a, 0) * detail::in_range(a, 1);
  };
  spec.kernels[DeviceKind::SimDevice] = detail::per_element<Scalar>(
      [](const KernelArgs<Scalar>& a, std::size_t i) { a.outputs[0][i] = a.inputs[0][i] * a.inputs[1][i]; });
  return spec;
}

/// Σ w_k·x_k accumulated left to right; weights are the variables "w0".."w{m-1}".
template <typename Scalar>
TransformationSpec<Scalar> weighted_sum(std::string name, std::size_t terms) {
  if (terms == 0) throw Error(ErrorCode::InvalidSpec, "'" + name + "' needs at least one term");
  TransformationSpec<Scalar> spec;
  spec.name = name;
  for (std::size_t k = 0; k < terms; ++k) {
    spec.inputs.push_back({"x" + std::to_string(k), std::nullopt});
    spec.variables.push_back("w" + std::to_string(k));
  }
  spec.outputs = {{"sum", detail::same_shapes(name)}};
  spec.kernels[DeviceKind::Host] = [](const KernelArgs<Scalar>& a) {
    auto out = detail::out_range(a);
    out = static_cast<Scalar>(a.variables[0]) * detail::in_range(a, 0);
    for (std::size_t k = 1; k < a.inputs.size(); ++k) out += static_cast<Scalar>(a.variables[k]) * detail::in_range(a, k);
  };
  spec.kernels[DeviceKind::SimDevice] = detail::per_element<Scalar>([](const KernelArgs<Scalar>& a, std::size_t i) {
    Scalar acc = static_cast<Scalar>(a.variables[0]) * a.inputs[0][i];
    for (std::size_t k = 1; k < a.inputs.size(); ++k) acc += static_cast<Scalar>(a.variables[k]) * a.inputs[k][i];
    a.outputs[0][i] = acc;
  });
  return spec;
}

/// Host-only node turning the mixing angles and CP phase into the six scalars
/// [Re W21, Re W31, Re W32, Im W21, Im W31, Im W32] for one (α, β) channel.
template <typename Scalar>
TransformationSpec<Scalar> osc_weights(std::string name, osc::Flavor alpha, osc::Flavor beta, bool antineutrino) {
  TransformationSpec<Scalar> spec;
  spec.name = std::move(name);
  spec.outputs = {{"weights", Shape{6}}};
  spec.variables = {"theta12", "theta13", "theta23", "delta_cp"};
  spec.kernels[DeviceKind::Host] = [=](const KernelArgs<Scalar>& a) {
    osc::OscParams p;
    p.theta12 = a.variables[0];
    p.theta13 = a.variables[1];
    p.theta23 = a.variables[2];
    p.delta_cp = a.variables[3];
    p.antineutrino = antineutrino;
    const auto w = osc::osc_weights(alpha, beta, osc::pmns_matrix(p));
    for (std::size_t k = 0; k < 3; ++k) {
      a.outputs[0][k] = static_cast<Scalar>(w.re[k]);
      a.outputs[0][k + 3] = static_cast<Scalar>(w.im[k]);
    }
  };
  return spec;
}

/// Phase vector Δ_ij over the energy grid for one mass pair. Variables: the splitting(s) and the
/// baseline; the (3,2) pair takes dm2_31 and dm2_21 and forms their difference.
template <typename Scalar>
TransformationSpec<Scalar> osc_phase(std::string name, osc::MassPair pair) {
  TransformationSpec<Scalar> spec;
  spec.name = std::move(name);
  spec.inputs = {{"energy", 1}};
  spec.outputs = {{"phase", SameAsInput{0}}};
  switch (pair) {
    case osc::MassPair::p21: spec.variables = {"dm2_21", "baseline"}; break;
    case osc::MassPair::p31: spec.variables = {"dm2_31", "baseline"}; break;
    case osc::MassPair::p32: spec.variables = {"dm2_31", "dm2_21", "baseline"}; break;
  }
  const auto splitting = [pair](std::span<const double> v) {
    return pair == osc::MassPair::p32 ? v[0] - v[1] : v[0];
  };
  spec.kernels[DeviceKind::Host] = [=](const KernelArgs<Scalar>& a) {
    const double dm2 = splitting(a.variables), baseline = a.variables.back();
    auto out = detail::out_range(a);
    auto energy = detail::in_range(a, 0);
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = osc::phase_at<Scalar>(dm2, baseline, energy[i]);
  };
  spec.kernels[DeviceKind::SimDevice] = detail::per_element<Scalar>([=](const KernelArgs<Scalar>& a, std::size_t i) {
    a.outputs[0][i] = osc::phase_at<Scalar>(splitting(a.variables), a.variables.back(), a.inputs[0][i]);
  });
  return spec;
}

/// Final assembly P = δ_{αβ} − 4 Σ Re W·sin²Δ + 2 Σ Im W·sin 2Δ from the three phase vectors and the
/// weights vector.
template <typename Scalar>
TransformationSpec<Scalar> oscprob(std::string name, bool same_flavor) {
  TransformationSpec<Scalar> spec;
  spec.name = name;
  spec.inputs = {{"phase21", 1}, {"phase31", 1}, {"phase32", 1}, {"weights", 1}};
  spec.outputs = {{"probability", ShapeFn([name](std::span<const Shape> in) {
                     detail::same_shapes(name)(in.first(3));
                     if (in[3] != Shape{6})
                       throw Error(ErrorCode::ShapeMismatch,
                                   "'" + name + "' weights must have shape [6], got " + shape_to_string(in[3]));
                     return in[0];
                   })}};
  const auto at = [same_flavor](const KernelArgs<Scalar>& a, std::size_t i) {
    const auto w = a.inputs[3];
    return osc::probability_at<Scalar>(same_flavor, {w[0], w[1], w[2]}, {w[3], w[4], w[5]}, a.inputs[0][i],
                                       a.inputs[1][i], a.inputs[2][i]);
  };
  spec.kernels[DeviceKind::Host] = [at](const KernelArgs<Scalar>& a) {
    auto out = detail::out_range(a);
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = at(a, a.begin + static_cast<std::size_t>(i));
  };
  spec.kernels[DeviceKind::SimDevice] =
      detail::per_element<Scalar>([at](const KernelArgs<Scalar>& a, std::size_t i) { a.outputs[0][i] = at(a, i); });
  return spec;
}

}  // namespace lazygraph::ops
