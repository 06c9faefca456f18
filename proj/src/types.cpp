#include "lazygraph/arena.hpp"
#include "lazygraph/types.hpp"

#include <sstream>

namespace lazygraph {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::GraphFinalized: return "GraphFinalized";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::AlreadyBound: return "AlreadyBound";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnknownPort: return "UnknownPort";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::UnboundInput: return "UnboundInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NoDeviceKernel: return "NoDeviceKernel";
    case ErrorCode::ArenaExhausted: return "ArenaExhausted";
    case ErrorCode::NoDeviceCopy: return "NoDeviceCopy";
    case ErrorCode::DeviceFault: return "DeviceFault";
    case ErrorCode::StalePlacement: return "StalePlacement";
    case ErrorCode::HostKernelMissing: return "HostKernelMissing";
  }
  return "Unknown";
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ']';
  return os.str();
}

std::string_view to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

std::string_view to_string(DeviceKind kind) { return kind == DeviceKind::Host ? "host" : "device"; }

std::string to_string(const DeviceSpec& device) {
  return device.is_host() ? "host" : "sim" + std::to_string(device.id);
}

std::string_view to_string(SyncState s) {
  switch (s) {
    case SyncState::HostOnly: return "HostOnly";
    case SyncState::Synced: return "Synced";
    case SyncState::HostDirty: return "HostDirty";
    case SyncState::DeviceDirty: return "DeviceDirty";
  }
  return "Unknown";
}

}  // namespace lazygraph
