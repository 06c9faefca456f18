#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lazygraph/types.hpp"

namespace lazygraph {

/// Which copies of a buffer hold current data.
///
/// HostOnly: no device copy exists. Synced: both copies agree.
/// HostDirty: only the host copy is current. DeviceDirty: only the device copy is current.
enum class SyncState { HostOnly, Synced, HostDirty, DeviceDirty };

std::string_view to_string(SyncState s);

enum class Side { Host, Device };

enum class TransferDirection { H2D, D2H };

/// Why a transfer happened. Demand transfers are the lazy syncs required to read data on the
/// other side; checkpoint transfers are issued by the executor's checkpoint policy.
enum class TransferCause { Demand, Checkpoint };

struct TransferEvent {
  TransferDirection direction;
  std::size_t bytes;
  std::uint64_t buffer;
  double timestamp_ns;  // virtual clock at completion
  TransferCause cause;
};

struct TransferLog {
  std::uint64_t h2d_count = 0;
  std::uint64_t d2h_count = 0;
  std::uint64_t h2d_bytes = 0;
  std::uint64_t d2h_bytes = 0;
  std::vector<TransferEvent> events;

  void append(const TransferEvent& ev) {
    if (ev.direction == TransferDirection::H2D) {
      ++h2d_count;
      h2d_bytes += ev.bytes;
    } else {
      ++d2h_count;
      d2h_bytes += ev.bytes;
    }
    events.push_back(ev);
  }

  /// Events appended after the first `first_event` entries, with matching counters.
  TransferLog since(std::size_t first_event) const {
    TransferLog out;
    for (std::size_t i = first_event; i < events.size(); ++i) out.append(events[i]);
    return out;
  }

  std::uint64_t count(TransferDirection dir, TransferCause cause) const {
    std::uint64_t n = 0;
    for (const auto& ev : events) n += (ev.direction == dir && ev.cause == cause) ? 1 : 0;
    return n;
  }
};

/// Virtual-time model for the simulated device. Nothing sleeps; costs are accumulated.
struct CostModel {
  double latency_ns = 10'000.0;     // per transfer
  double bytes_per_ns = 8.0;        // ~8 GB/s link
  double launch_ns = 5'000.0;       // per device kernel dispatch
  double elements_per_ns = 4.0;     // device throughput

  double transfer_ns(std::size_t bytes) const { return latency_ns + static_cast<double>(bytes) / bytes_per_ns; }
  double kernel_ns(std::size_t elements) const {
    return launch_ns + static_cast<double>(elements) / elements_per_ns;
  }
};

struct NoFailure {};
struct FailAtKernel {
  std::uint64_t n = 1;  // 1-based device dispatch index
};
struct FailWithProbability {
  double p = 0.0;
  std::uint64_t seed = 0;
};
using FailurePolicy = std::variant<NoFailure, FailAtKernel, FailWithProbability>;

struct ArenaConfig {
  int devices = 1;
  std::optional<std::size_t> capacity_bytes;  // per device; unlimited when empty
  std::optional<std::size_t> chunk_size;      // elements per device chunk; unlimited when empty
  CostModel cost;
  FailurePolicy failure = NoFailure{};
};

/// Arguments handed to a kernel invocation. Kernels write outputs[k][i] for i in [begin, end),
/// where the range indexes the first output. Inputs are always passed whole.
template <typename Scalar>
struct KernelArgs {
  std::span<const std::span<const Scalar>> inputs;
  std::span<const std::span<Scalar>> outputs;
  std::span<const double> variables;
  std::size_t begin = 0;
  std::size_t end = 0;
};

template <typename Scalar>
using Kernel = std::function<void(const KernelArgs<Scalar>&)>;

template <typename Scalar>
class SimArena;

/// Shaped storage with a host copy and an optional copy in the simulated device arena.
/// Host data is reachable only through SimArena, which enforces the sync discipline.
template <typename Scalar>
class DataBuffer {
 public:
  DataBuffer() = default;
  DataBuffer(DataBuffer&&) noexcept = default;
  DataBuffer& operator=(DataBuffer&&) noexcept = default;
  DataBuffer(const DataBuffer&) = delete;
  DataBuffer& operator=(const DataBuffer&) = delete;

  std::uint64_t id() const noexcept { return id_; }
  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return host_.size(); }
  std::size_t bytes() const noexcept { return host_.size() * sizeof(Scalar); }
  static constexpr Precision precision() { return precision_of_v<Scalar>; }
  SyncState sync_state() const noexcept { return state_; }
  bool has_device_copy() const noexcept { return device_.has_value(); }
  std::optional<int> device_id() const {
    return device_ ? std::optional<int>(device_->device) : std::nullopt;
  }

  bool host_valid() const noexcept { return state_ != SyncState::DeviceDirty; }
  bool device_valid() const noexcept {
    return state_ == SyncState::Synced || state_ == SyncState::DeviceDirty;
  }

 private:
  friend class SimArena<Scalar>;

  struct DeviceHandle {
    int device;
    std::size_t slot;
  };

  std::uint64_t id_ = 0;
  Shape shape_;
  std::vector<Scalar> host_;
  std::optional<DeviceHandle> device_;
  SyncState state_ = SyncState::HostOnly;
};

/// The simulated accelerator: a second address space per device, reachable only by transfers
/// and device kernels, plus dispatch, fault injection and transfer accounting.
template <typename Scalar>
class SimArena {
 public:
  explicit SimArena(ArenaConfig config = {})
      : config_(std::move(config)),
        storage_(static_cast<std::size_t>(std::max(config_.devices, 0))),
        used_bytes_(storage_.size(), 0),
        failed_(storage_.size(), false) {
    if (const auto* fp = std::get_if<FailWithProbability>(&config_.failure)) rng_.seed(fp->seed);
  }

  SimArena(const SimArena&) = delete;
  SimArena& operator=(const SimArena&) = delete;

  const ArenaConfig& config() const noexcept { return config_; }
  int device_count() const noexcept { return static_cast<int>(storage_.size()); }

  void set_chunk_size(std::optional<std::size_t> chunk) { config_.chunk_size = chunk; }

  DataBuffer<Scalar> allocate(const Shape& shape, const std::vector<DeviceSpec>& placement) {
    for (auto extent : shape)
      if (extent == 0) throw Error(ErrorCode::InvalidSpec, "zero extent in shape " + shape_to_string(shape));
    DataBuffer<Scalar> buf;
    buf.id_ = next_buffer_id_++;
    buf.shape_ = shape;
    buf.host_.assign(element_count(shape), Scalar{0});
    for (const auto& dev : placement) {
      if (dev.is_host()) continue;
      check_device(dev.id);
      auto& used = used_bytes_[dev.id];
      if (config_.capacity_bytes && used + buf.bytes() > *config_.capacity_bytes) {
        throw Error(ErrorCode::ArenaExhausted, "device " + std::to_string(dev.id) + " needs " +
                                                   std::to_string(used + buf.bytes()) + " bytes, capacity " +
                                                   std::to_string(*config_.capacity_bytes));
      }
      used += buf.bytes();
      auto& slots = storage_[dev.id];
      slots.emplace_back(buf.host_.size(), Scalar{0});
      buf.device_ = typename DataBuffer<Scalar>::DeviceHandle{dev.id, slots.size() - 1};
      buf.state_ = SyncState::Synced;
      break;
    }
    return buf;
  }

  void sync_to_device(DataBuffer<Scalar>& buf, TransferCause cause = TransferCause::Demand) {
    if (!buf.device_) throw Error(ErrorCode::NoDeviceCopy, "buffer " + std::to_string(buf.id_));
    if (buf.state_ != SyncState::HostDirty) return;
    require_alive(buf.device_->device);
    device_store(buf) = buf.host_;
    log_transfer(TransferDirection::H2D, buf, cause);
    buf.state_ = SyncState::Synced;
  }

  void sync_to_host(DataBuffer<Scalar>& buf, TransferCause cause = TransferCause::Demand) {
    if (buf.state_ != SyncState::DeviceDirty) return;
    require_alive(buf.device_->device);
    buf.host_ = device_store(buf);
    log_transfer(TransferDirection::D2H, buf, cause);
    buf.state_ = SyncState::Synced;
  }

  /// Write barrier. A write to one side invalidates the other; a buffer without a device copy
  /// stays HostOnly.
  void mark_dirty(DataBuffer<Scalar>& buf, Side side) {
    if (!buf.device_) {
      if (side == Side::Device) throw Error(ErrorCode::NoDeviceCopy, "buffer " + std::to_string(buf.id_));
      return;
    }
    buf.state_ = side == Side::Host ? SyncState::HostDirty : SyncState::DeviceDirty;
  }

  /// Host read view; issues a D2H first when only the device copy is current.
  std::span<const Scalar> read_host(DataBuffer<Scalar>& buf) {
    sync_to_host(buf);
    return buf.host_;
  }

  /// Host write view. The caller is expected to overwrite the data; the device copy is invalidated.
  std::span<Scalar> write_host(DataBuffer<Scalar>& buf) {
    sync_to_host(buf);
    mark_dirty(buf, Side::Host);
    return buf.host_;
  }

  /// Runs `kernel` synchronously on `device`. Returns normally on success; throws DeviceFault with
  /// every buffer's sync state untouched on an injected or device-loss failure.
  void dispatch(DeviceSpec device, const Kernel<Scalar>& kernel, std::span<DataBuffer<Scalar>* const> inputs,
                std::span<DataBuffer<Scalar>* const> outputs, std::span<const double> variables = {}) {
    const std::size_t extent = outputs.empty() ? 0 : outputs.front()->size();
    std::vector<std::span<const Scalar>> in_views;
    std::vector<std::span<Scalar>> out_views;
    in_views.reserve(inputs.size());
    out_views.reserve(outputs.size());

    if (device.is_host()) {
      for (auto* in : inputs) {
        if (!in->host_valid())
          throw Error(ErrorCode::StalePlacement, "host kernel input buffer " + std::to_string(in->id_) +
                                                     " has no current host copy");
        in_views.emplace_back(in->host_);
      }
      for (auto* out : outputs) out_views.emplace_back(out->host_);
      ++host_invocations_;
      const auto t0 = std::chrono::steady_clock::now();
      kernel(KernelArgs<Scalar>{in_views, out_views, variables, 0, extent});
      host_wall_ns_ += elapsed_ns(t0);
      for (auto* out : outputs) mark_dirty(*out, Side::Host);
      return;
    }

    check_device(device.id);
    for (auto* in : inputs) {
      if (!in->device_ || in->device_->device != device.id || !in->device_valid())
        throw Error(ErrorCode::StalePlacement, "device kernel input buffer " + std::to_string(in->id_) +
                                                   " has no current copy on " + to_string(device));
      in_views.emplace_back(device_store(*in));
    }
    for (auto* out : outputs) {
      if (!out->device_ || out->device_->device != device.id)
        throw Error(ErrorCode::StalePlacement, "device kernel output buffer " + std::to_string(out->id_) +
                                                   " is not placed on " + to_string(device));
      out_views.emplace_back(device_store(*out));
    }

    ++kernel_invocations_;
    if (failed_[device.id]) throw Error(ErrorCode::DeviceFault, to_string(device) + " is unavailable");
    if (should_fail()) {
      throw Error(ErrorCode::DeviceFault,
                  "injected fault at device dispatch " + std::to_string(kernel_invocations_));
    }

    const std::size_t chunk = config_.chunk_size.value_or(std::numeric_limits<std::size_t>::max());
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t begin = 0; begin < extent; begin += chunk) {
      const std::size_t end = extent - begin > chunk ? begin + chunk : extent;
      kernel(KernelArgs<Scalar>{in_views, out_views, variables, begin, end});
    }
    if (extent == 0) kernel(KernelArgs<Scalar>{in_views, out_views, variables, 0, 0});
    device_wall_ns_ += elapsed_ns(t0);
    const double cost = config_.cost.kernel_ns(extent);
    virtual_compute_ns_ += cost;
    clock_ns_ += cost;
    for (auto* out : outputs) mark_dirty(*out, Side::Device);
  }

  void fail_device(int id) {
    check_device(id);
    failed_[id] = true;
  }
  bool device_available(int id) const {
    return id >= 0 && id < device_count() && !failed_[static_cast<std::size_t>(id)];
  }

  /// Snapshot of the log; later transfers do not change it.
  TransferLog transfer_report() const { return log_; }
  const TransferLog& transfer_log() const noexcept { return log_; }

  void reset_counters() {
    log_ = {};
    host_invocations_ = 0;
    virtual_transfer_ns_ = virtual_compute_ns_ = 0.0;
    host_wall_ns_ = device_wall_ns_ = 0.0;
  }

  /// Device dispatches, including failed ones. Drives FailAtKernel and is never reset.
  std::uint64_t kernel_invocations() const noexcept { return kernel_invocations_; }
  std::uint64_t host_invocations() const noexcept { return host_invocations_; }
  double virtual_transfer_ns() const noexcept { return virtual_transfer_ns_; }
  double virtual_compute_ns() const noexcept { return virtual_compute_ns_; }
  double host_kernel_wall_ns() const noexcept { return host_wall_ns_; }
  double device_kernel_wall_ns() const noexcept { return device_wall_ns_; }

 private:
  static double elapsed_ns(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0).count();
  }

  void check_device(int id) const {
    if (id < 0 || id >= device_count())
      throw Error(ErrorCode::InvalidSpec, "no simulated device with id " + std::to_string(id));
  }

  void require_alive(int id) const {
    if (failed_[id]) throw Error(ErrorCode::DeviceFault, "sim" + std::to_string(id) + " is unavailable");
  }

  std::vector<Scalar>& device_store(const DataBuffer<Scalar>& buf) {
    return storage_[buf.device_->device][buf.device_->slot];
  }

  bool should_fail() {
    return std::visit(
        [this](const auto& policy) {
          using P = std::decay_t<decltype(policy)>;
          if constexpr (std::is_same_v<P, FailAtKernel>) {
            return kernel_invocations_ == policy.n;
          } else if constexpr (std::is_same_v<P, FailWithProbability>) {
            return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < policy.p;
          } else {
            return false;
          }
        },
        config_.failure);
  }

  void log_transfer(TransferDirection dir, const DataBuffer<Scalar>& buf, TransferCause cause) {
    const double cost = config_.cost.transfer_ns(buf.bytes());
    virtual_transfer_ns_ += cost;
    clock_ns_ += cost;
    log_.append(TransferEvent{dir, buf.bytes(), buf.id_, clock_ns_, cause});
  }

  ArenaConfig config_;
  std::vector<std::vector<std::vector<Scalar>>> storage_;
  std::vector<std::size_t> used_bytes_;
  std::vector<bool> failed_;
  std::mt19937_64 rng_;
  TransferLog log_;
  std::uint64_t next_buffer_id_ = 0;
  std::uint64_t kernel_invocations_ = 0;
  std::uint64_t host_invocations_ = 0;
  double clock_ns_ = 0.0;
  double virtual_transfer_ns_ = 0.0;
  double virtual_compute_ns_ = 0.0;
  double host_wall_ns_ = 0.0;
  double device_wall_ns_ = 0.0;
};

}  // namespace lazygraph
