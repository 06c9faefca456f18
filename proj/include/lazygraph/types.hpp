#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lazygraph {

enum class ErrorCode {
  GraphFinalized,
  InvalidSpec,
  AlreadyBound,
  SelfLoop,
  DuplicateName,
  UnknownNode,
  UnknownPort,
  UnknownVariable,
  CycleDetected,
  UnboundInput,
  ShapeMismatch,
  NoDeviceKernel,
  ArenaExhausted,
  NoDeviceCopy,
  DeviceFault,
  StalePlacement,
  HostKernelMissing,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the engine carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string shape_to_string(const Shape& shape);

enum class Precision { f32, f64 };

std::string_view to_string(Precision p);

template <typename Scalar>
struct precision_of;
template <>
struct precision_of<float> {
  static constexpr Precision value = Precision::f32;
};
template <>
struct precision_of<double> {
  static constexpr Precision value = Precision::f64;
};
template <typename Scalar>
inline constexpr Precision precision_of_v = precision_of<Scalar>::value;

enum class DeviceKind { Host, SimDevice };

std::string_view to_string(DeviceKind kind);

struct DeviceSpec {
  DeviceKind kind = DeviceKind::Host;
  int id = 0;

  static constexpr DeviceSpec host() { return {DeviceKind::Host, 0}; }
  static constexpr DeviceSpec sim(int id) { return {DeviceKind::SimDevice, id}; }

  bool is_host() const noexcept { return kind == DeviceKind::Host; }
  friend bool operator==(const DeviceSpec&, const DeviceSpec&) = default;
};

std::string to_string(const DeviceSpec& device);

/// Opaque node handle. Handles are dense indices assigned in creation order.
struct NodeId {
  std::uint32_t value = 0;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

enum class PortDirection { Input, Output };

struct PortRef {
  NodeId node;
  PortDirection direction = PortDirection::Output;
  std::uint32_t index = 0;
  friend bool operator==(const PortRef&, const PortRef&) = default;
};

inline PortRef output_port(NodeId node, std::uint32_t index = 0) {
  return {node, PortDirection::Output, index};
}
inline PortRef input_port(NodeId node, std::uint32_t index = 0) {
  return {node, PortDirection::Input, index};
}

struct VariableRef {
  std::uint32_t value = 0;
  friend auto operator<=>(const VariableRef&, const VariableRef&) = default;
};

}  // namespace lazygraph
